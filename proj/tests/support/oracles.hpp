#ifndef BCGMIL_TESTS_ORACLES_HPP_
#define BCGMIL_TESTS_ORACLES_HPP_

// Test-side reference computations. These are written independently of the
// library code: straight-line loops, brute-force searches and dense
// eigensolvers, so a shared bug is unlikely to hide in both.

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "bcgmil/fumi.hpp"

namespace bcgmil::oracle {

inline Eigen::MatrixXd random_matrix(std::mt19937_64& rng, Eigen::Index rows,
                                     Eigen::Index cols) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = g(rng);
  }
  return m;
}

inline Eigen::MatrixXd unit_columns(Eigen::MatrixXd m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j) m.col(j) /= m.col(j).norm();
  return m;
}

// argmin_u 0.5 (u - v)^2 + lambda |u| over a uniform grid.
inline double grid_prox(double v, double lambda, double lo, double hi, double step) {
  double best_u = lo;
  double best = std::numeric_limits<double>::infinity();
  const auto n = static_cast<long>(std::llround((hi - lo) / step));
  for (long i = 0; i <= n; ++i) {
    const double u = lo + static_cast<double>(i) * step;
    const double f = 0.5 * (u - v) * (u - v) + lambda * std::abs(u);
    if (f < best) {
      best = f;
      best_u = u;
    }
  }
  return best_u;
}

inline double l1(const Eigen::VectorXd& v) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) s += std::abs(v[i]);
  return s;
}

inline double sq_norm(const Eigen::VectorXd& v) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) s += v[i] * v[i];
  return s;
}

// Term-by-term evaluation of the expected objective, written directly from
// its definition: for each positive instance the two hypotheses z = 1 and
// z = 0 weighted by p and 1 - p; negative instances only have z = 0.
// gamma is recomputed here from the two atom sets unless `frozen_gamma`
// (M x T) is given, which is how the learner holds it during one M-step.
inline double literal_objective(const TrainingSet& data, const Dictionary& dict,
                                const Codes& codes, const Eigen::VectorXd& p,
                                double lambda, double psi, double gamma_scale,
                                const Eigen::MatrixXd& target_old,
                                const Eigen::MatrixXd* frozen_gamma = nullptr) {
  const Eigen::Index t_count = dict.target.cols();
  const Eigen::Index m_count = dict.background.cols();
  double total = 0.0;
  for (Eigen::Index i = 0; i < data.positive.cols(); ++i) {
    const Eigen::VectorXd x = data.positive.col(i);
    Eigen::VectorXd a_plus(t_count);
    Eigen::VectorXd a_minus(m_count);
    for (Eigen::Index t = 0; t < t_count; ++t) a_plus[t] = codes.positive(t, i);
    for (Eigen::Index k = 0; k < m_count; ++k) a_minus[k] = codes.positive(t_count + k, i);
    Eigen::VectorXd recon_bg = Eigen::VectorXd::Zero(x.size());
    for (Eigen::Index k = 0; k < m_count; ++k) recon_bg += a_minus[k] * dict.background.col(k);
    Eigen::VectorXd recon_full = recon_bg;
    for (Eigen::Index t = 0; t < t_count; ++t) recon_full += a_plus[t] * dict.target.col(t);
    const double with_target = 0.5 * sq_norm(x - recon_full) + lambda * (l1(a_plus) + l1(a_minus));
    const double without_target = 0.5 * sq_norm(x - recon_bg) + lambda * l1(a_minus);
    total += psi * (p[i] * with_target + (1.0 - p[i]) * without_target);
  }
  for (Eigen::Index i = 0; i < data.negative.cols(); ++i) {
    const Eigen::VectorXd x = data.negative.col(i);
    Eigen::VectorXd recon = Eigen::VectorXd::Zero(x.size());
    double a_l1 = 0.0;
    for (Eigen::Index k = 0; k < m_count; ++k) {
      recon += codes.negative(k, i) * dict.background.col(k);
      a_l1 += std::abs(codes.negative(k, i));
    }
    total += 0.5 * sq_norm(x - recon) + lambda * a_l1;
  }
  for (Eigen::Index k = 0; k < m_count; ++k) {
    for (Eigen::Index t = 0; t < t_count; ++t) {
      const Eigen::VectorXd dk = dict.background.col(k);
      const Eigen::VectorXd dt = target_old.col(t);
      const double gamma = frozen_gamma != nullptr
                               ? (*frozen_gamma)(k, t)
                               : gamma_scale * dk.dot(dt) / (dk.norm() * dt.norm());
      total += gamma * dk.dot(dt);
    }
  }
  return total;
}

// Minimizes f over a vector by cyclic coordinate descent, each coordinate
// by golden-section search on a bracket that is widened until it holds the
// minimum. Only suitable for smooth convex f.
inline Eigen::VectorXd coordinate_descent(
    const std::function<double(const Eigen::VectorXd&)>& f, Eigen::VectorXd x,
    int sweeps, double tol) {
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int s = 0; s < sweeps; ++s) {
    double moved = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      auto g = [&](double v) {
        Eigen::VectorXd y = x;
        y[i] = v;
        return f(y);
      };
      double step = 1.0;
      double lo = x[i] - step;
      double hi = x[i] + step;
      while (g(lo) < g(x[i]) || g(hi) < g(x[i])) {
        step *= 2.0;
        lo = x[i] - step;
        hi = x[i] + step;
      }
      double a = lo;
      double b = hi;
      double c = b - phi * (b - a);
      double d = a + phi * (b - a);
      while (b - a > 1e-13 * std::max(1.0, std::abs(a))) {
        if (g(c) < g(d)) {
          b = d;
        } else {
          a = c;
        }
        c = b - phi * (b - a);
        d = a + phi * (b - a);
      }
      const double v = 0.5 * (a + b);
      moved = std::max(moved, std::abs(v - x[i]));
      x[i] = v;
    }
    if (moved < tol) break;
  }
  return x;
}

// Sample covariance by direct double summation (n - 1 denominator).
inline Eigen::MatrixXd direct_covariance(const Eigen::MatrixXd& cols) {
  const Eigen::Index d = cols.rows();
  const Eigen::Index n = cols.cols();
  std::vector<double> mean(static_cast<std::size_t>(d), 0.0);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) mean[static_cast<std::size_t>(i)] += cols(i, j);
    mean[static_cast<std::size_t>(i)] /= static_cast<double>(n);
  }
  Eigen::MatrixXd c(d, d);
  for (Eigen::Index a = 0; a < d; ++a) {
    for (Eigen::Index b = 0; b < d; ++b) {
      double s = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        s += (cols(a, j) - mean[static_cast<std::size_t>(a)]) *
             (cols(b, j) - mean[static_cast<std::size_t>(b)]);
      }
      c(a, b) = s / static_cast<double>(n - 1);
    }
  }
  return c;
}

// Best |cosine| between a and any circular shift of b within +-max_shift.
inline double best_shifted_cosine(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                                  int max_shift) {
  const Eigen::Index n = a.size();
  double best = 0.0;
  for (int s = -max_shift; s <= max_shift; ++s) {
    double dot = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const Eigen::Index j = ((i + s) % n + n) % n;
      dot += a[i] * b[j];
    }
    best = std::max(best, std::abs(dot) / (a.norm() * b.norm()));
  }
  return best;
}

}  // namespace bcgmil::oracle

#endif  // BCGMIL_TESTS_ORACLES_HPP_
