#include "bcgmil/fumi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "bcgmil/errors.hpp"
#include "bcgmil/sparse_coding.hpp"

namespace bcgmil {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

constexpr double kStaleDenominator = 1e-12;

void check_codes(const TrainingSet& data, const Dictionary& dict,
                 const Codes& codes, const LatentPosteriors& posteriors) {
  const Index k = dict.num_target() + dict.num_background();
  if (data.positive.cols() > 0 && data.positive.rows() != dict.dim()) {
    throw DimensionError("positive instances do not match atom length");
  }
  if (data.negative.cols() > 0 && data.negative.rows() != dict.dim()) {
    throw DimensionError("negative instances do not match atom length");
  }
  if (codes.positive.cols() != data.positive.cols() ||
      (data.positive.cols() > 0 && codes.positive.rows() != k)) {
    throw DimensionError("positive codes do not match data/dictionary");
  }
  if (codes.negative.cols() != data.negative.cols() ||
      (data.negative.cols() > 0 &&
       codes.negative.rows() != dict.num_background())) {
    throw DimensionError("negative codes do not match data/dictionary");
  }
  if (posteriors.positive.size() != data.positive.cols()) {
    throw DimensionError("posterior count does not match positive instances");
  }
}

// Residual of positive instances under the background-only hypothesis.
MatrixXd positive_background_residual(const TrainingSet& data,
                                      const Dictionary& dict,
                                      const Codes& codes) {
  const Index m = dict.num_background();
  return data.positive - dict.background * codes.positive.bottomRows(m);
}

MatrixXd positive_full_residual(const TrainingSet& data,
                                const Dictionary& dict, const Codes& codes) {
  return data.positive - dict.full() * codes.positive;
}

MatrixXd negative_residual(const TrainingSet& data, const Dictionary& dict,
                           const Codes& codes) {
  return data.negative - dict.background * codes.negative;
}

VectorXd posteriors_from_residual(const MatrixXd& background_residual,
                                  double beta) {
  VectorXd p(background_residual.cols());
  for (Index i = 0; i < p.size(); ++i) {
    const double r2 = background_residual.col(i).squaredNorm();
    p[i] = std::clamp(1.0 - std::exp(-beta * r2), 0.0, 1.0);
  }
  return p;
}

// Background atoms by farthest-point sampling on 1 - |cos|.
MatrixXd init_background(const MatrixXd& negatives, int m, std::mt19937_64& rng) {
  const Index n = negatives.cols();
  VectorXd norms = negatives.colwise().norm().transpose();
  std::vector<Index> usable;
  for (Index i = 0; i < n; ++i) {
    if (norms[i] > 0.0) usable.push_back(i);
  }
  if (usable.empty()) throw DataError("all negative instances are zero");

  MatrixXd atoms(negatives.rows(), m);
  std::uniform_int_distribution<std::size_t> pick(0, usable.size() - 1);
  Index chosen = usable[pick(rng)];
  VectorXd min_dist = VectorXd::Constant(n, std::numeric_limits<double>::infinity());
  for (int j = 0; j < m; ++j) {
    atoms.col(j) = negatives.col(chosen) / norms[chosen];
    for (Index i : usable) {
      const double c = std::abs(atoms.col(j).dot(negatives.col(i))) / norms[i];
      min_dist[i] = std::min(min_dist[i], 1.0 - c);
    }
    if (j + 1 == m) break;
    double best = -1.0;
    for (Index i : usable) {
      if (min_dist[i] > best) {
        best = min_dist[i];
        chosen = i;
      }
    }
  }
  return atoms;
}

// Target atoms from the positive instances least explained by the
// background span, with that span projected out.
MatrixXd init_target(const MatrixXd& positives, const MatrixXd& background,
                     int t, std::mt19937_64& rng) {
  const Eigen::HouseholderQR<MatrixXd> qr(background);
  const MatrixXd q =
      qr.householderQ() * MatrixXd::Identity(background.rows(), background.cols());
  const MatrixXd residual = positives - q * (q.transpose() * positives);
  VectorXd norms = residual.colwise().norm().transpose();

  std::vector<Index> order(static_cast<std::size_t>(norms.size()));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return norms[a] > norms[b]; });

  MatrixXd atoms(positives.rows(), t);
  std::normal_distribution<double> gauss;
  for (int j = 0; j < t; ++j) {
    const auto pos = static_cast<std::size_t>(j);
    if (pos < order.size() && norms[order[pos]] > 0.0) {
      atoms.col(j) = residual.col(order[pos]) / norms[order[pos]];
    } else {
      VectorXd v(positives.rows());
      for (Index r = 0; r < v.size(); ++r) v[r] = gauss(rng);
      atoms.col(j) = v.normalized();
    }
  }
  return atoms;
}

// inner ISTA sweep over all positive instances with posteriors p.
void sweep_positive(const TrainingSet& data, const Dictionary& dict,
                    const MatrixXd& gram, const MatrixXd& correlation,
                    const VectorXd& p, double lambda, double eta,
                    MatrixXd& codes) {
  const Index t = dict.num_target();
  const Index m = dict.num_background();
  const Index k = t + m;
  MatrixXd gram_bg = MatrixXd::Zero(k, k);
  gram_bg.bottomRightCorner(m, m) = gram.bottomRightCorner(m, m);
  for (Index i = 0; i < data.positive.cols(); ++i) {
    const double pi = p[i];
    VectorXd grad = (pi * gram + (1.0 - pi) * gram_bg) * codes.col(i);
    grad.head(t) -= pi * correlation.col(i).head(t);
    grad.tail(m) -= correlation.col(i).tail(m);
    VectorXd step = codes.col(i) - eta * grad;
    for (Index r = 0; r < k; ++r) {
      const double thresh = r < t ? eta * lambda * pi : eta * lambda;
      codes(r, i) = soft_threshold(step[r], thresh);
    }
  }
}

void sweep_negative(const MatrixXd& gram_bg, const MatrixXd& correlation,
                    double lambda, double eta, MatrixXd& codes) {
  const double thresh = eta * lambda;
  for (Index i = 0; i < codes.cols(); ++i) {
    VectorXd step = codes.col(i) - eta * (gram_bg * codes.col(i) - correlation.col(i));
    for (Index r = 0; r < step.size(); ++r) {
      codes(r, i) = soft_threshold(step[r], thresh);
    }
  }
}

Index argmax_column_norm(const MatrixXd& m) {
  Index best = 0;
  double best_norm = -1.0;
  for (Index i = 0; i < m.cols(); ++i) {
    const double n = m.col(i).squaredNorm();
    if (n > best_norm) {
      best_norm = n;
      best = i;
    }
  }
  return best;
}

}  // namespace

MatrixXd Dictionary::full() const {
  MatrixXd d(dim(), num_target() + num_background());
  d << target, background;
  return d;
}

void Dictionary::validate() const {
  if (target.cols() < 1 || background.cols() < 1) {
    throw DimensionError("dictionary needs at least one atom of each kind");
  }
  if (target.rows() != background.rows()) {
    throw DimensionError("target and background atoms differ in length");
  }
  for (Index j = 0; j < target.cols(); ++j) {
    if (target.col(j).squaredNorm() == 0.0) throw DimensionError("zero target atom");
  }
  for (Index j = 0; j < background.cols(); ++j) {
    if (background.col(j).squaredNorm() == 0.0) {
      throw DimensionError("zero background atom");
    }
  }
}

VectorXd SparseCode::stacked() const {
  VectorXd a(target.size() + background.size());
  a << target, background;
  return a;
}

void FumiParams::validate() const {
  if (num_target < 1 || num_background < 1) {
    throw ParameterError("T and M must be >= 1");
  }
  if (!(lambda >= 0.0)) throw ParameterError("lambda must be >= 0");
  if (!(gamma_scale >= 0.0)) throw ParameterError("Gamma must be >= 0");
  if (!(beta > 0.0)) throw ParameterError("beta must be > 0");
  if (psi && !(*psi > 0.0)) throw ParameterError("psi must be > 0");
  if (inner_iters < 1) throw ParameterError("inner_iters must be >= 1");
  if (max_em_iters < 1) throw ParameterError("max_em_iters must be >= 1");
  if (!(tol >= 0.0)) throw ParameterError("tol must be >= 0");
  if (warmup_iters < 0) throw ParameterError("warmup_iters must be >= 0");
  if (stale_reseed_after < 1) {
    throw ParameterError("stale_reseed_after must be >= 1");
  }
}

TrainingSet TrainingSet::from_bags(const std::vector<Bag>& bags) {
  Index d = -1;
  Index n_pos = 0;
  Index n_neg = 0;
  for (const Bag& bag : bags) {
    for (const Instance& inst : bag.instances) {
      if (d < 0) d = inst.features.size();
      if (inst.features.size() != d) {
        throw DimensionError("instances differ in dimension");
      }
      (bag.positive() ? n_pos : n_neg) += 1;
    }
  }
  TrainingSet set;
  if (d < 0) d = 0;
  set.positive.resize(d, n_pos);
  set.negative.resize(d, n_neg);
  Index ip = 0;
  Index in = 0;
  for (std::size_t b = 0; b < bags.size(); ++b) {
    for (const Instance& inst : bags[b].instances) {
      if (bags[b].positive()) {
        set.positive.col(ip++) = inst.features;
        set.positive_bag.push_back(b);
      } else {
        set.negative.col(in++) = inst.features;
        set.negative_bag.push_back(b);
      }
    }
  }
  return set;
}

SparseCode Codes::positive_code(Index i, Index num_target) const {
  const Index m = positive.rows() - num_target;
  return {positive.col(i).head(num_target), positive.col(i).tail(m)};
}

SparseCode Codes::negative_code(Index i, Index num_target) const {
  return {VectorXd::Zero(num_target), negative.col(i)};
}

DiscriminativePenalty DiscriminativePenalty::from(const MatrixXd& background,
                                                  const MatrixXd& target_old,
                                                  double gamma_scale) {
  DiscriminativePenalty pen;
  pen.target_old = target_old;
  pen.gamma.resize(background.cols(), target_old.cols());
  for (Index k = 0; k < background.cols(); ++k) {
    for (Index t = 0; t < target_old.cols(); ++t) {
      pen.gamma(k, t) =
          adaptive_gamma(background.col(k), target_old.col(t), gamma_scale);
    }
  }
  return pen;
}

double DiscriminativePenalty::value(const MatrixXd& background) const {
  if (gamma.size() == 0) return 0.0;
  return (gamma.array() *
          (background.transpose() * target_old).array())
      .sum();
}

double target_posterior(const VectorXd& x, const MatrixXd& background,
                        const VectorXd& background_code, double beta) {
  if (!(beta > 0.0)) throw ParameterError("beta must be > 0");
  const double r2 = (x - background * background_code).squaredNorm();
  return std::clamp(1.0 - std::exp(-beta * r2), 0.0, 1.0);
}

double adaptive_gamma(const VectorXd& background_atom,
                      const VectorXd& target_atom_old, double gamma_scale) {
  const double nb = background_atom.norm();
  const double nt = target_atom_old.norm();
  if (nb == 0.0 || nt == 0.0) {
    throw ParameterError("adaptive_gamma: zero-norm atom");
  }
  return gamma_scale * background_atom.dot(target_atom_old) / (nb * nt);
}

double expected_objective(const TrainingSet& data, const Dictionary& dict,
                          const Codes& codes,
                          const LatentPosteriors& posteriors, double lambda,
                          double psi, const DiscriminativePenalty& penalty) {
  check_codes(data, dict, codes, posteriors);
  const Index t = dict.num_target();
  const Index m = dict.num_background();
  double total = 0.0;
  if (data.positive.cols() > 0) {
    const MatrixXd r0 = positive_background_residual(data, dict, codes);
    const MatrixXd r1 = r0 - dict.target * codes.positive.topRows(t);
    for (Index i = 0; i < data.positive.cols(); ++i) {
      const double p = posteriors.positive[i];
      const double l1_target = codes.positive.col(i).head(t).lpNorm<1>();
      const double l1_bg = codes.positive.col(i).tail(m).lpNorm<1>();
      total += psi * (0.5 * p * r1.col(i).squaredNorm() +
                      0.5 * (1.0 - p) * r0.col(i).squaredNorm() +
                      lambda * (p * l1_target + l1_bg));
    }
  }
  if (data.negative.cols() > 0) {
    const MatrixXd rn = negative_residual(data, dict, codes);
    for (Index i = 0; i < data.negative.cols(); ++i) {
      total += 0.5 * rn.col(i).squaredNorm() +
               lambda * codes.negative.col(i).lpNorm<1>();
    }
  }
  if (penalty.gamma.size() > 0) {
    if (penalty.gamma.rows() != m || penalty.gamma.cols() != t ||
        penalty.target_old.rows() != dict.dim()) {
      throw DimensionError("penalty does not match dictionary");
    }
    total += penalty.value(dict.background);
  }
  return total;
}

AtomUpdate update_target_atom(Index t, const TrainingSet& data,
                              const Codes& codes,
                              const LatentPosteriors& posteriors,
                              const Dictionary& dict) {
  check_codes(data, dict, codes, posteriors);
  if (t < 0 || t >= dict.num_target()) throw ParameterError("bad target index");
  const VectorXd atom = dict.target.col(t);
  if (data.positive.cols() == 0) return {atom, true};

  const VectorXd alpha = codes.positive.row(t).transpose();
  const VectorXd weight = posteriors.positive.cwiseProduct(alpha);
  const double denom = weight.dot(alpha);
  if (!(denom > kStaleDenominator)) return {atom, true};

  // Residual with atom t removed from the model.
  const MatrixXd residual = positive_full_residual(data, dict, codes);
  const VectorXd numer = residual * weight + atom * denom;
  return {numer / denom, false};
}

AtomUpdate update_background_atom(Index k, const TrainingSet& data,
                                  const Codes& codes,
                                  const LatentPosteriors& posteriors,
                                  const Dictionary& dict, double psi,
                                  const DiscriminativePenalty& penalty) {
  check_codes(data, dict, codes, posteriors);
  const Index t = dict.num_target();
  const Index m = dict.num_background();
  if (k < 0 || k >= m) throw ParameterError("bad background index");
  const VectorXd atom = dict.background.col(k);

  VectorXd numer = VectorXd::Zero(dict.dim());
  double denom = 0.0;
  if (data.positive.cols() > 0) {
    const MatrixXd r0 = positive_background_residual(data, dict, codes);
    const MatrixXd r1 = r0 - dict.target * codes.positive.topRows(t);
    const VectorXd alpha = codes.positive.row(t + k).transpose();
    const VectorXd& p = posteriors.positive;
    // p * r1 + (1 - p) * r0, weighted by psi * alpha.
    const VectorXd w1 = psi * p.cwiseProduct(alpha);
    const VectorXd w0 = psi * (VectorXd::Ones(p.size()) - p).cwiseProduct(alpha);
    const double a2 = psi * alpha.squaredNorm();
    numer += r1 * w1 + r0 * w0 + atom * a2;
    denom += a2;
  }
  if (data.negative.cols() > 0) {
    const MatrixXd rn = negative_residual(data, dict, codes);
    const VectorXd alpha = codes.negative.row(k).transpose();
    const double a2 = alpha.squaredNorm();
    numer += rn * alpha + atom * a2;
    denom += a2;
  }
  if (!(denom > kStaleDenominator)) return {atom, true};
  if (penalty.gamma.size() > 0) {
    if (penalty.gamma.rows() != m || penalty.gamma.cols() != t) {
      throw DimensionError("penalty does not match dictionary");
    }
    numer -= penalty.target_old * penalty.gamma.row(k).transpose();
  }
  return {numer / denom, false};
}

VectorXd alpha_gradient(const VectorXd& x, const Dictionary& dict,
                        const VectorXd& code, double p_target) {
  const Index t = dict.num_target();
  const Index m = dict.num_background();
  if (code.size() != t + m || x.size() != dict.dim()) {
    throw DimensionError("alpha_gradient: size mismatch");
  }
  const MatrixXd d = dict.full();
  MatrixXd weighted(d.rows(), t + m);
  weighted << p_target * dict.target, dict.background;
  MatrixXd gram_bg = MatrixXd::Zero(t + m, t + m);
  gram_bg.bottomRightCorner(m, m) = dict.background.transpose() * dict.background;
  return -weighted.transpose() * x +
         (p_target * (d.transpose() * d) + (1.0 - p_target) * gram_bg) * code;
}

VectorXd code_step_positive(const VectorXd& x, const Dictionary& dict,
                            const VectorXd& code, double p_target,
                            double lambda, double eta) {
  if (!(eta > 0.0)) throw ParameterError("eta must be > 0");
  const Index t = dict.num_target();
  const VectorXd step = code - eta * alpha_gradient(x, dict, code, p_target);
  VectorXd thresh = VectorXd::Constant(step.size(), eta * lambda);
  thresh.head(t).setConstant(eta * lambda * p_target);
  return soft_threshold(step, thresh);
}

VectorXd code_step_negative(const VectorXd& x, const MatrixXd& background,
                            const VectorXd& background_code, double lambda,
                            double eta) {
  if (!(eta > 0.0)) throw ParameterError("eta must be > 0");
  if (background_code.size() != background.cols() || x.size() != background.rows()) {
    throw DimensionError("code_step_negative: size mismatch");
  }
  const VectorXd step =
      background_code +
      eta * (background.transpose() * (x - background * background_code));
  return soft_threshold(step, VectorXd::Constant(step.size(), eta * lambda));
}

FitResult fit(const TrainingSet& data, const FumiParams& params,
              std::uint64_t seed, const FitObserver& observer) {
  params.validate();
  if (data.positive.cols() == 0) {
    throw DataError("no positive bags: cannot learn target concept");
  }
  if (data.negative.cols() == 0) {
    throw DataError("no negative bags: cannot learn background");
  }
  if (data.positive.rows() != data.negative.rows()) {
    throw DimensionError("positive and negative instances differ in dimension");
  }

  const int t_count = params.num_target;
  const int m_count = params.num_background;
  const Index k_count = t_count + m_count;
  const double psi = params.psi.value_or(
      static_cast<double>(data.negative.cols()) /
      static_cast<double>(data.positive.cols()));
  std::mt19937_64 rng(seed);

  FitResult result;
  result.psi = psi;
  Dictionary& dict = result.dictionary;
  dict.background = init_background(data.negative, m_count, rng);
  dict.target = init_target(data.positive, dict.background, t_count, rng);

  Codes& codes = result.codes;
  codes.positive = MatrixXd::Zero(k_count, data.positive.cols());
  codes.negative = MatrixXd::Zero(m_count, data.negative.cols());
  LatentPosteriors& post = result.posteriors;
  post.positive = VectorXd::Ones(data.positive.cols());

  DiscriminativePenalty penalty =
      DiscriminativePenalty::from(dict.background, dict.target, params.gamma_scale);

  double eta_pos = step_length(dict.full());
  double eta_neg = step_length(dict.background);
  auto notify = [&](FitStage stage, int em_iter, int inner_iter) {
    if (!observer) return;
    const FitState state{data,   dict,      codes,   post,    penalty,
                         params.lambda, psi, em_iter, inner_iter, eta_pos,
                         eta_neg};
    observer(stage, state);
  };

  {
    const MatrixXd full = dict.full();
    const MatrixXd gram = full.transpose() * full;
    const MatrixXd corr_pos = full.transpose() * data.positive;
    const MatrixXd gram_bg = dict.background.transpose() * dict.background;
    const MatrixXd corr_neg = dict.background.transpose() * data.negative;
    for (int q = 0; q < params.warmup_iters; ++q) {
      sweep_positive(data, dict, gram, corr_pos, post.positive, params.lambda,
                     eta_pos, codes.positive);
      sweep_negative(gram_bg, corr_neg, params.lambda, eta_neg, codes.negative);
    }
  }
  notify(FitStage::kInitialized, 0, 0);

  std::vector<int> stale_target(static_cast<std::size_t>(t_count), 0);
  std::vector<int> stale_background(static_cast<std::size_t>(m_count), 0);

  for (int iter = 1; iter <= params.max_em_iters; ++iter) {
    // E-step.
    post.positive = posteriors_from_residual(
        positive_background_residual(data, dict, codes), params.beta);
    notify(FitStage::kEStep, iter, 0);

    // M-step: atoms one at a time, each renormalized right away.
    const Dictionary previous = dict;
    penalty = DiscriminativePenalty::from(previous.background, previous.target,
                                          params.gamma_scale);
    for (Index t = 0; t < t_count; ++t) {
      auto& stale = stale_target[static_cast<std::size_t>(t)];
      AtomUpdate upd = update_target_atom(t, data, codes, post, dict);
      const double norm = upd.atom.norm();
      if (upd.stale || !(norm > 0.0) || !std::isfinite(norm)) {
        if (++stale >= params.stale_reseed_after) {
          const Index i = argmax_column_norm(positive_full_residual(data, dict, codes));
          dict.target.col(t) = data.positive.col(i).normalized();
          ++result.reseeds;
          stale = 0;
        }
        continue;
      }
      stale = 0;
      dict.target.col(t) = upd.atom / norm;
    }
    for (Index k = 0; k < m_count; ++k) {
      auto& stale = stale_background[static_cast<std::size_t>(k)];
      AtomUpdate upd =
          update_background_atom(k, data, codes, post, dict, psi, penalty);
      const double norm = upd.atom.norm();
      if (upd.stale || !(norm > 0.0) || !std::isfinite(norm)) {
        if (++stale >= params.stale_reseed_after) {
          const Index i = argmax_column_norm(negative_residual(data, dict, codes));
          dict.background.col(k) = data.negative.col(i).normalized();
          ++result.reseeds;
          stale = 0;
        }
        continue;
      }
      stale = 0;
      dict.background.col(k) = upd.atom / norm;
    }
    eta_pos = step_length(dict.full());
    eta_neg = step_length(dict.background);
    notify(FitStage::kAtomsUpdated, iter, 0);

    // Sparse codes.
    const MatrixXd full = dict.full();
    const MatrixXd gram = full.transpose() * full;
    const MatrixXd corr_pos = full.transpose() * data.positive;
    const MatrixXd gram_bg = dict.background.transpose() * dict.background;
    const MatrixXd corr_neg = dict.background.transpose() * data.negative;
    for (int q = 1; q <= params.inner_iters; ++q) {
      sweep_positive(data, dict, gram, corr_pos, post.positive, params.lambda,
                     eta_pos, codes.positive);
      sweep_negative(gram_bg, corr_neg, params.lambda, eta_neg, codes.negative);
      notify(FitStage::kCodeStep, iter, q);
    }

    result.objective_trace.push_back(expected_objective(
        data, dict, codes, post, params.lambda, psi, penalty));
    result.iterations = iter;

    double change = 0.0;
    for (Index t = 0; t < t_count; ++t) {
      change = std::max(change, (dict.target.col(t) - previous.target.col(t)).norm());
    }
    for (Index k = 0; k < m_count; ++k) {
      change = std::max(
          change, (dict.background.col(k) - previous.background.col(k)).norm());
    }
    notify(FitStage::kIterationDone, iter, 0);
    if (change < params.tol) {
      result.converged = true;
      break;
    }
  }
  return result;
}

FitResult fit(const std::vector<Bag>& bags, const FumiParams& params,
              std::uint64_t seed, const FitObserver& observer) {
  return fit(TrainingSet::from_bags(bags), params, seed, observer);
}

}  // namespace bcgmil
