#ifndef BCGMIL_DETECTOR_HPP_
#define BCGMIL_DETECTOR_HPP_

// Hybrid structured detection with a learned dictionary: each candidate
// instance is coded once with the background atoms and once with the full
// dictionary, and the ratio of the two Mahalanobis residual energies is the
// confidence that a heartbeat is present. Confirmed beats come from a
// cross-channel vote on those confidences.

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "bcgmil/evaluation.hpp"
#include "bcgmil/fumi.hpp"
#include "bcgmil/signal.hpp"

namespace bcgmil {

class BackgroundModel {
 public:
  // Sample covariance of the columns of `instances` (n - 1 denominator, or
  // the zero matrix for a single instance) plus ridge * I. If the result is
  // not positive definite the ridge is raised to 1e-6 * trace / d (or 1e-6
  // for a zero trace) and ridge_raised() reports it.
  static BackgroundModel estimate(const Eigen::MatrixXd& instances,
                                  double ridge);
  // Takes an explicit covariance; throws ParameterError when it is not
  // symmetric positive definite.
  static BackgroundModel from_covariance(Eigen::MatrixXd covariance,
                                         double ridge = 0.0);

  const Eigen::MatrixXd& covariance() const { return covariance_; }
  double ridge() const { return ridge_; }
  bool ridge_raised() const { return ridge_raised_; }
  Eigen::Index dim() const { return covariance_.rows(); }

  // r^T Sigma^-1 r
  double mahalanobis(const Eigen::VectorXd& r) const;

 private:
  Eigen::MatrixXd covariance_;
  Eigen::LLT<Eigen::MatrixXd> factor_;
  double ridge_ = 0.0;
  bool ridge_raised_ = false;
};

struct CodingParams {
  double lambda = 5e-3;
  int iterations = 50;
};

// Precomputed per-dictionary quantities for repeated confidence evaluation.
class HsdDetector {
 public:
  HsdDetector(Dictionary dictionary, BackgroundModel background,
              CodingParams coding);

  struct Detail {
    double confidence = 1.0;
    Eigen::VectorXd background_code;
    Eigen::VectorXd full_code;
    double background_residual = 0.0;  // Mahalanobis energy
    double full_residual = 0.0;
  };

  double confidence(const Eigen::VectorXd& x) const;
  Detail evaluate(const Eigen::VectorXd& x) const;

  const Dictionary& dictionary() const { return dict_; }
  const BackgroundModel& background() const { return background_; }
  const CodingParams& coding() const { return coding_; }

 private:
  Dictionary dict_;
  BackgroundModel background_;
  CodingParams coding_;
  Eigen::MatrixXd full_;
  Eigen::MatrixXd gram_;
  Eigen::MatrixXd gram_bg_;
  double eta_ = 1.0;
  double eta_bg_ = 1.0;
};

// Lambda = background residual energy / full residual energy, both floored
// at 1e-12.
double hsd_confidence(const Eigen::VectorXd& x, const Dictionary& dict,
                      const BackgroundModel& background,
                      const CodingParams& coding = {});

struct ConfidencePoint {
  std::size_t peak_index = 0;
  double confidence = 0.0;
};

// Per channel, confidences at candidate peaks in increasing peak order.
struct ConfidenceSeries {
  std::vector<std::vector<ConfidencePoint>> channels;
};

ConfidenceSeries confidence_series(const Recording& recording,
                                   const HsdDetector& detector,
                                   const FeatureOptions& features = {});

struct DetectionParams {
  int neighborhood = 25;
  double threshold = 1.32;
  int min_votes = 2;
  int refractory = 40;

  void validate(std::size_t channel_count) const;
};

struct Beat {
  std::size_t index = 0;
  double confidence_sum = 0.0;
};

// Cross-channel vote. Candidates with confidence >= threshold are scanned
// in time order; a cluster starts at the earliest unused candidate and takes
// every candidate at most `neighborhood` samples after it. With at least
// min_votes distinct channels the cluster becomes a beat at the median
// candidate index (mean of the two middle ones, rounded down, for even
// counts); otherwise only its first candidate is dropped. A beat closer
// than `refractory` to the previous one replaces it only with a strictly
// larger confidence sum.
std::vector<Beat> vote_beats(const ConfidenceSeries& series,
                             const DetectionParams& params);

std::vector<std::size_t> beat_indices(const std::vector<Beat>& beats);

struct DetectionGrid {
  std::vector<double> thresholds;
  std::vector<int> neighborhoods;
  static DetectionGrid standard();
};

struct TrainingDetection {
  ConfidenceSeries series;
  std::vector<std::size_t> gt_beats;
};

// Grid search maximizing beat F1 (matches within tolerance_s, one-to-one)
// summed over all training recordings; ties keep the smaller threshold,
// then the smaller neighborhood. min_votes and refractory come from `base`.
DetectionParams learn_detection_params(
    const std::vector<TrainingDetection>& training, double fs,
    const DetectionParams& base = {},
    const DetectionGrid& grid = DetectionGrid::standard(),
    double tolerance_s = 0.3);

DetectionParams learn_detection_params(const Recording& training,
                                       const HsdDetector& detector,
                                       const FeatureOptions& features = {},
                                       const DetectionParams& base = {});

}  // namespace bcgmil

#endif  // BCGMIL_DETECTOR_HPP_
