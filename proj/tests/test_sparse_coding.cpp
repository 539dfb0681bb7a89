#include <random>

#include <gtest/gtest.h>

#include "bcgmil/errors.hpp"
#include "bcgmil/sparse_coding.hpp"
#include "support/oracles.hpp"

namespace bcgmil {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

TEST(SoftThreshold, FormulaExamples) {
  EXPECT_DOUBLE_EQ(soft_threshold(3.0, 1.0), 2.0);
  EXPECT_DOUBLE_EQ(soft_threshold(-0.5, 1.0), 0.0);
  EXPECT_DOUBLE_EQ(soft_threshold(-3.0, 1.0), -2.0);
}

TEST(SoftThreshold, ZeroThresholdIsIdentity) {
  VectorXd v(4);
  v << -2.5, 0.0, 1e-9, 7.0;
  EXPECT_EQ(soft_threshold(v, VectorXd::Zero(4)), v);
}

TEST(SoftThreshold, MatchesGridProx) {
  EXPECT_NEAR(soft_threshold(1.7, 0.3), 1.4, 1e-12);
  EXPECT_NEAR(soft_threshold(1.7, 0.3), oracle::grid_prox(1.7, 0.3, -3.0, 3.0, 1e-4), 1e-4);
}

TEST(SoftThreshold, MatchesGridProxOnRandomPairs) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> v(-2.0, 2.0);
  std::uniform_real_distribution<double> lam(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const double x = v(rng);
    const double l = lam(rng);
    EXPECT_NEAR(soft_threshold(x, l), oracle::grid_prox(x, l, -2.5, 2.5, 5e-5), 1e-4);
  }
}

TEST(SoftThreshold, PerEntryThresholds) {
  VectorXd v(3);
  v << 1.0, -1.0, 0.5;
  VectorXd t(3);
  t << 0.25, 2.0, 0.0;
  const VectorXd s = soft_threshold(v, t);
  EXPECT_DOUBLE_EQ(s[0], 0.75);
  EXPECT_DOUBLE_EQ(s[1], 0.0);
  EXPECT_DOUBLE_EQ(s[2], 0.5);
}

TEST(StepLength, OrthonormalColumnsGiveOne) {
  std::mt19937_64 rng(3);
  const MatrixXd q = oracle::random_matrix(rng, 10, 4).householderQr().householderQ() *
                     MatrixXd::Identity(10, 4);
  EXPECT_NEAR(step_length(q), 1.0, 1e-10);
}

TEST(StepLength, ScaledIdentity) {
  EXPECT_NEAR(step_length(2.0 * MatrixXd::Identity(2, 2)), 0.25, 1e-12);
}

TEST(StepLength, MatchesDenseEigensolver) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 5; ++trial) {
    const MatrixXd d = oracle::random_matrix(rng, 91, 6);
    const MatrixXd g = d.transpose() * d;
    const double expected = Eigen::SelfAdjointEigenSolver<MatrixXd>(g).eigenvalues().maxCoeff();
    EXPECT_NEAR(max_eigenvalue(g), expected, 1e-8 * expected);
    EXPECT_NEAR(step_length(d), 1.0 / expected, 1e-8 / expected);
  }
}

TEST(StepLength, ZeroDictionaryIsRejected) {
  EXPECT_THROW(step_length(MatrixXd::Zero(5, 2)), ParameterError);
}

TEST(IstaLasso, ZeroLambdaReachesLeastSquares) {
  std::mt19937_64 rng(5);
  const MatrixXd d = oracle::random_matrix(rng, 20, 4);
  const VectorXd x = oracle::random_matrix(rng, 20, 1);
  const MatrixXd g = d.transpose() * d;
  const VectorXd ls = d.colPivHouseholderQr().solve(x);
  const VectorXd a = ista_lasso(g, d.transpose() * x, 0.0, 1.0 / max_eigenvalue(g), 20000,
                                VectorXd::Zero(4));
  EXPECT_LT((a - ls).norm(), 1e-8);
}

TEST(IstaLasso, LargeLambdaGivesZero) {
  std::mt19937_64 rng(6);
  const MatrixXd d = oracle::random_matrix(rng, 20, 4);
  const VectorXd x = oracle::random_matrix(rng, 20, 1);
  const VectorXd c = d.transpose() * x;
  const MatrixXd g = d.transpose() * d;
  const VectorXd a = ista_lasso(g, c, c.cwiseAbs().maxCoeff(), 1.0 / max_eigenvalue(g), 500,
                                VectorXd::Zero(4));
  EXPECT_EQ(a, VectorXd::Zero(4));
}

TEST(IstaLasso, ObjectiveNeverIncreases) {
  std::mt19937_64 rng(8);
  const MatrixXd d = oracle::random_matrix(rng, 15, 5);
  const VectorXd x = oracle::random_matrix(rng, 15, 1);
  const MatrixXd g = d.transpose() * d;
  const VectorXd c = d.transpose() * x;
  const double eta = 1.0 / max_eigenvalue(g);
  VectorXd a = VectorXd::Zero(5);
  double prev = lasso_objective(x, d, a, 0.3);
  for (int i = 0; i < 200; ++i) {
    a = ista_lasso(g, c, 0.3, eta, 1, a);
    const double now = lasso_objective(x, d, a, 0.3);
    EXPECT_LE(now, prev + 1e-12);
    prev = now;
  }
}

}  // namespace
}  // namespace bcgmil
