#include <random>

#include <benchmark/benchmark.h>

#include "bcgmil/sparse_coding.hpp"

namespace {

Eigen::MatrixXd random_dictionary(Eigen::Index d, Eigen::Index k) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  Eigen::MatrixXd m(d, k);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = g(rng);
  m.colwise().normalize();
  return m;
}

// One lasso solve of a 91-sample instance against K atoms.
void BM_IstaLasso(benchmark::State& state) {
  const auto k = static_cast<Eigen::Index>(state.range(0));
  const Eigen::MatrixXd d = random_dictionary(91, k);
  const Eigen::MatrixXd gram = d.transpose() * d;
  const Eigen::VectorXd corr = d.transpose() * Eigen::VectorXd::Ones(91);
  const double eta = 1.0 / bcgmil::max_eigenvalue(gram);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        bcgmil::ista_lasso(gram, corr, 5e-3, eta, 50, Eigen::VectorXd::Zero(k)));
  }
}
BENCHMARK(BM_IstaLasso)->Arg(6)->Arg(18);

void BM_StepLength(benchmark::State& state) {
  const Eigen::MatrixXd d = random_dictionary(91, state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(bcgmil::step_length(d));
}
BENCHMARK(BM_StepLength)->Arg(6)->Arg(18);

}  // namespace
