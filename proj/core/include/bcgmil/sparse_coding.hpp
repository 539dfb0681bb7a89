#ifndef BCGMIL_SPARSE_CODING_HPP_
#define BCGMIL_SPARSE_CODING_HPP_

#include <Eigen/Dense>

namespace bcgmil {

// sign(v) * max(|v| - thresh, 0), the proximal map of thresh * |.|.
double soft_threshold(double v, double thresh);

// Entrywise shrinkage with per-entry thresholds (all >= 0).
Eigen::VectorXd soft_threshold(const Eigen::VectorXd& v,
                               const Eigen::VectorXd& thresh);

// Largest eigenvalue of a symmetric positive semidefinite matrix by power
// iteration. Stops when the Rayleigh quotient changes by less than
// rel_tol (relative); after max_iters falls back to a dense eigensolver.
double max_eigenvalue(const Eigen::MatrixXd& sym, double rel_tol = 1e-10,
                      int max_iters = 1000);

// Gradient step length 1 / lambda_max(D^T D).
double step_length(const Eigen::MatrixXd& dictionary);

// Plain lasso coding min 0.5 ||x - D a||^2 + lambda ||a||_1 by ISTA, in Gram
// form. `gram` = D^T D, `correlation` = D^T x. Runs exactly `iterations`
// steps from `start` with step `eta`.
Eigen::VectorXd ista_lasso(const Eigen::MatrixXd& gram,
                           const Eigen::VectorXd& correlation, double lambda,
                           double eta, int iterations,
                           const Eigen::VectorXd& start);

// 0.5 ||x - D a||^2 + lambda ||a||_1
double lasso_objective(const Eigen::VectorXd& x, const Eigen::MatrixXd& dict,
                       const Eigen::VectorXd& code, double lambda);

}  // namespace bcgmil

#endif  // BCGMIL_SPARSE_CODING_HPP_
