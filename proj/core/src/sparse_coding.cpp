#include "bcgmil/sparse_coding.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

#include "bcgmil/errors.hpp"

namespace bcgmil {

double soft_threshold(double v, double thresh) {
  const double mag = std::abs(v) - thresh;
  if (mag <= 0.0) return 0.0;
  return v > 0.0 ? mag : -mag;
}

Eigen::VectorXd soft_threshold(const Eigen::VectorXd& v,
                               const Eigen::VectorXd& thresh) {
  if (v.size() != thresh.size()) {
    throw DimensionError("soft_threshold: threshold length mismatch");
  }
  Eigen::VectorXd out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (thresh[i] < 0.0) throw ParameterError("negative threshold");
    out[i] = soft_threshold(v[i], thresh[i]);
  }
  return out;
}

double max_eigenvalue(const Eigen::MatrixXd& sym, double rel_tol,
                      int max_iters) {
  if (sym.rows() != sym.cols() || sym.rows() == 0) {
    throw DimensionError("max_eigenvalue: matrix must be square and nonempty");
  }
  const Eigen::Index n = sym.rows();
  // Start away from any particular eigenvector.
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    v[i] = 1.0 + 0.1 * static_cast<double>(i % 7) / static_cast<double>(n);
  }
  v.normalize();
  double estimate = v.dot(sym * v);
  if (n == 1) return estimate;
  for (int it = 0; it < max_iters; ++it) {
    Eigen::VectorXd w = sym * v;
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    v = w / norm;
    const double next = v.dot(sym * v);
    if (std::abs(next - estimate) <= rel_tol * std::abs(next)) return next;
    estimate = next;
  }
  // Nearly tied leading eigenvalues slow the iteration to a crawl; the
  // matrices here are small, so finish with a dense solver.
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(sym, Eigen::EigenvaluesOnly)
      .eigenvalues()
      .maxCoeff();
}

double step_length(const Eigen::MatrixXd& dictionary) {
  if (dictionary.size() == 0 || dictionary.squaredNorm() == 0.0) {
    throw ParameterError("step_length: dictionary is zero");
  }
  const Eigen::MatrixXd gram = dictionary.transpose() * dictionary;
  return 1.0 / max_eigenvalue(gram);
}

Eigen::VectorXd ista_lasso(const Eigen::MatrixXd& gram,
                           const Eigen::VectorXd& correlation, double lambda,
                           double eta, int iterations,
                           const Eigen::VectorXd& start) {
  Eigen::VectorXd a = start;
  const double thresh = eta * lambda;
  for (int it = 0; it < iterations; ++it) {
    Eigen::VectorXd step = a - eta * (gram * a - correlation);
    for (Eigen::Index i = 0; i < a.size(); ++i) {
      a[i] = soft_threshold(step[i], thresh);
    }
  }
  return a;
}

double lasso_objective(const Eigen::VectorXd& x, const Eigen::MatrixXd& dict,
                       const Eigen::VectorXd& code, double lambda) {
  return 0.5 * (x - dict * code).squaredNorm() + lambda * code.lpNorm<1>();
}

}  // namespace bcgmil
