#ifndef BCGMIL_FUMI_HPP_
#define BCGMIL_FUMI_HPP_

// Multiple-instance dictionary learning with a shared background dictionary
// and a latent target indicator per positive-bag instance, optimized by EM.
//
// Every instance is modeled as x ~ z D+ a+ + D- a-, where z = 0 for all
// instances in negative bags and is unknown (posterior p) for instances in
// positive bags. The expected objective minimized by the M-step is
//
//   sum_pos psi [ p/2 ||x - D+ a+ - D- a-||^2 + (1-p)/2 ||x - D- a-||^2
//                 + lambda (p ||a+||_1 + ||a-||_1) ]
// + sum_neg [ 1/2 ||x - D- a-||^2 + lambda ||a-||_1 ]
// + sum_k sum_t gamma_kt <d-_k, d+_t(old)>
//
// with gamma_kt = Gamma cos(angle(d-_k, d+_t(old))) frozen for the
// iteration.

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "bcgmil/signal.hpp"

namespace bcgmil {

// Target atoms (d x T) and background atoms (d x M), one atom per column.
struct Dictionary {
  Eigen::MatrixXd target;
  Eigen::MatrixXd background;

  Eigen::Index dim() const { return target.rows(); }
  Eigen::Index num_target() const { return target.cols(); }
  Eigen::Index num_background() const { return background.cols(); }
  // [D+ D-]
  Eigen::MatrixXd full() const;
  void validate() const;
};

struct SparseCode {
  Eigen::VectorXd target;
  Eigen::VectorXd background;

  Eigen::VectorXd stacked() const;
};

struct FumiParams {
  int num_target = 3;
  int num_background = 3;
  double lambda = 5e-3;
  double gamma_scale = 5e-3;
  double beta = 90.0;
  // Weight of positive-bag instances; defaults to N-/N+ when unset.
  std::optional<double> psi;
  int inner_iters = 5;
  int max_em_iters = 100;
  double tol = 1e-5;
  int warmup_iters = 5;
  int stale_reseed_after = 3;

  void validate() const;
};

// Instances of a bag collection split by label, one instance per column.
struct TrainingSet {
  Eigen::MatrixXd positive;
  Eigen::MatrixXd negative;
  std::vector<std::size_t> positive_bag;
  std::vector<std::size_t> negative_bag;

  Eigen::Index dim() const {
    return positive.cols() > 0 ? positive.rows() : negative.rows();
  }
  static TrainingSet from_bags(const std::vector<Bag>& bags);
};

// Codes of all training instances. Positive columns stack [a+; a-]
// (T + M rows); negative columns hold a- only since a+ is pinned to zero.
struct Codes {
  Eigen::MatrixXd positive;
  Eigen::MatrixXd negative;

  SparseCode positive_code(Eigen::Index i, Eigen::Index num_target) const;
  // The target block of a negative code is all zeros.
  SparseCode negative_code(Eigen::Index i, Eigen::Index num_target) const;
};

// P(z = 1) per positive-bag instance. Negative-bag instances have P(z = 1)
// = 0 by construction and are not stored.
struct LatentPosteriors {
  Eigen::VectorXd positive;
};

// Discriminative term state: gamma (M x T) and the previous target atoms.
struct DiscriminativePenalty {
  Eigen::MatrixXd gamma;
  Eigen::MatrixXd target_old;

  // gamma from the current background atoms and previous target atoms.
  static DiscriminativePenalty from(const Eigen::MatrixXd& background,
                                    const Eigen::MatrixXd& target_old,
                                    double gamma_scale);
  double value(const Eigen::MatrixXd& background) const;
};

// P(z = 1 | x) = 1 - exp(-beta ||x - D- a-||^2) for a positive-bag instance.
double target_posterior(const Eigen::VectorXd& x,
                        const Eigen::MatrixXd& background,
                        const Eigen::VectorXd& background_code, double beta);

// Gamma cos(theta) between a background atom and a previous target atom.
double adaptive_gamma(const Eigen::VectorXd& background_atom,
                      const Eigen::VectorXd& target_atom_old,
                      double gamma_scale);

// Expected objective (see the header comment).
double expected_objective(const TrainingSet& data, const Dictionary& dict,
                          const Codes& codes,
                          const LatentPosteriors& posteriors, double lambda,
                          double psi, const DiscriminativePenalty& penalty);

struct AtomUpdate {
  Eigen::VectorXd atom;
  // True when the update had no support (zero denominator); atom is then
  // the unchanged input atom.
  bool stale = false;
};

// Closed-form minimizers of the expected objective over one atom with all
// else fixed. Results are not normalized.
AtomUpdate update_target_atom(Eigen::Index t, const TrainingSet& data,
                              const Codes& codes,
                              const LatentPosteriors& posteriors,
                              const Dictionary& dict);
AtomUpdate update_background_atom(Eigen::Index k, const TrainingSet& data,
                                  const Codes& codes,
                                  const LatentPosteriors& posteriors,
                                  const Dictionary& dict, double psi,
                                  const DiscriminativePenalty& penalty);

// Gradient of p/2 ||x - D a||^2 + (1-p)/2 ||x - D- a-||^2 with respect to
// the stacked code a = [a+; a-].
Eigen::VectorXd alpha_gradient(const Eigen::VectorXd& x,
                               const Dictionary& dict,
                               const Eigen::VectorXd& code, double p_target);

// One proximal gradient step for a positive-bag instance: gradient step of
// length eta, then shrinkage by eta * lambda * p on the target block and
// eta * lambda on the background block.
Eigen::VectorXd code_step_positive(const Eigen::VectorXd& x,
                                   const Dictionary& dict,
                                   const Eigen::VectorXd& code,
                                   double p_target, double lambda, double eta);

// One proximal gradient step on the background block alone.
Eigen::VectorXd code_step_negative(const Eigen::VectorXd& x,
                                   const Eigen::MatrixXd& background,
                                   const Eigen::VectorXd& background_code,
                                   double lambda, double eta);

enum class FitStage {
  kInitialized,
  kEStep,
  kAtomsUpdated,
  kCodeStep,
  kIterationDone,
};

// Read-only view of the learner state handed to a FitObserver.
struct FitState {
  const TrainingSet& data;
  const Dictionary& dictionary;
  const Codes& codes;
  const LatentPosteriors& posteriors;
  const DiscriminativePenalty& penalty;
  double lambda;
  double psi;
  int em_iter;
  int inner_iter;
  double eta_positive;
  double eta_negative;
};

using FitObserver = std::function<void(FitStage, const FitState&)>;

struct FitResult {
  Dictionary dictionary;
  Codes codes;
  LatentPosteriors posteriors;
  std::vector<double> objective_trace;
  int iterations = 0;
  bool converged = false;
  double psi = 1.0;
  // Number of times a stale atom was re-seeded.
  int reseeds = 0;
};

FitResult fit(const TrainingSet& data, const FumiParams& params,
              std::uint64_t seed, const FitObserver& observer = {});
FitResult fit(const std::vector<Bag>& bags, const FumiParams& params,
              std::uint64_t seed, const FitObserver& observer = {});

}  // namespace bcgmil

#endif  // BCGMIL_FUMI_HPP_
