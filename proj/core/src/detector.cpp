#include "bcgmil/detector.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "bcgmil/errors.hpp"
#include "bcgmil/sparse_coding.hpp"

namespace bcgmil {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

constexpr double kEnergyFloor = 1e-12;

}  // namespace

BackgroundModel BackgroundModel::estimate(const MatrixXd& instances,
                                          double ridge) {
  if (instances.cols() < 1) throw DataError("background model needs instances");
  if (!(ridge >= 0.0)) throw ParameterError("ridge must be >= 0");
  const Index d = instances.rows();
  const Index n = instances.cols();
  MatrixXd cov = MatrixXd::Zero(d, d);
  if (n > 1) {
    const VectorXd mean = instances.rowwise().mean();
    const MatrixXd centered = instances.colwise() - mean;
    cov = centered * centered.transpose() / static_cast<double>(n - 1);
    // Exact symmetry regardless of the product kernel.
    cov = 0.5 * (cov + cov.transpose()).eval();
  }

  BackgroundModel model;
  model.ridge_ = ridge;
  model.covariance_ = cov + ridge * MatrixXd::Identity(d, d);
  model.factor_.compute(model.covariance_);
  if (model.factor_.info() != Eigen::Success ||
      model.factor_.matrixLLT().diagonal().minCoeff() <= 0.0) {
    const double trace = cov.trace();
    const double raised = std::max(ridge, trace > 0.0 ? 1e-6 * trace / static_cast<double>(d) : 1e-6);
    model.ridge_ = raised;
    model.ridge_raised_ = true;
    model.covariance_ = cov + raised * MatrixXd::Identity(d, d);
    model.factor_.compute(model.covariance_);
    if (model.factor_.info() != Eigen::Success) {
      throw ParameterError("background covariance is not positive definite");
    }
  }
  return model;
}

BackgroundModel BackgroundModel::from_covariance(MatrixXd covariance,
                                                 double ridge) {
  if (covariance.rows() != covariance.cols() || covariance.rows() == 0) {
    throw DimensionError("covariance must be square");
  }
  const double asym = (covariance - covariance.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-10 * std::max(1.0, covariance.cwiseAbs().maxCoeff())) {
    throw ParameterError("covariance is not symmetric");
  }
  BackgroundModel model;
  model.ridge_ = ridge;
  model.covariance_ = std::move(covariance);
  model.factor_.compute(model.covariance_);
  if (model.factor_.info() != Eigen::Success ||
      model.factor_.matrixLLT().diagonal().minCoeff() <= 0.0) {
    throw ParameterError("covariance is not positive definite");
  }
  return model;
}

double BackgroundModel::mahalanobis(const VectorXd& r) const {
  if (r.size() != dim()) throw DimensionError("residual length mismatch");
  const VectorXd w = factor_.matrixL().solve(r);
  return w.squaredNorm();
}

HsdDetector::HsdDetector(Dictionary dictionary, BackgroundModel background,
                         CodingParams coding)
    : dict_(std::move(dictionary)),
      background_(std::move(background)),
      coding_(coding) {
  dict_.validate();
  if (background_.dim() != dict_.dim()) {
    throw DimensionError("background model and dictionary differ in dimension");
  }
  if (coding_.iterations < 1) throw ParameterError("coding iterations must be >= 1");
  if (!(coding_.lambda >= 0.0)) throw ParameterError("lambda must be >= 0");
  full_ = dict_.full();
  gram_ = full_.transpose() * full_;
  gram_bg_ = dict_.background.transpose() * dict_.background;
  eta_ = 1.0 / max_eigenvalue(gram_);
  eta_bg_ = 1.0 / max_eigenvalue(gram_bg_);
}

HsdDetector::Detail HsdDetector::evaluate(const VectorXd& x) const {
  if (x.size() != dict_.dim()) throw DimensionError("instance length mismatch");
  const Index t = dict_.num_target();
  const Index m = dict_.num_background();

  Detail out;
  const VectorXd corr = full_.transpose() * x;
  out.background_code = ista_lasso(gram_bg_, corr.tail(m), coding_.lambda,
                                   eta_bg_, coding_.iterations, VectorXd::Zero(m));
  VectorXd warm(t + m);
  warm << VectorXd::Zero(t), out.background_code;
  out.full_code =
      ista_lasso(gram_, corr, coding_.lambda, eta_, coding_.iterations, warm);

  out.background_residual =
      background_.mahalanobis(x - dict_.background * out.background_code);
  out.full_residual = background_.mahalanobis(x - full_ * out.full_code);
  out.confidence = std::max(out.background_residual, kEnergyFloor) /
                   std::max(out.full_residual, kEnergyFloor);
  return out;
}

double HsdDetector::confidence(const VectorXd& x) const {
  return evaluate(x).confidence;
}

double hsd_confidence(const VectorXd& x, const Dictionary& dict,
                      const BackgroundModel& background,
                      const CodingParams& coding) {
  return HsdDetector(dict, background, coding).confidence(x);
}

ConfidenceSeries confidence_series(const Recording& recording,
                                   const HsdDetector& detector,
                                   const FeatureOptions& features) {
  if (static_cast<Index>(features.dimension()) != detector.dictionary().dim()) {
    throw DimensionError("feature length does not match the dictionary");
  }
  const auto filtered = filter_recording(recording, features);
  ConfidenceSeries series;
  series.channels.resize(filtered.size());
  for (std::size_t c = 0; c < filtered.size(); ++c) {
    const auto peaks = find_peaks(filtered[c], features.min_separation);
    const auto instances = extract_instances(filtered[c], peaks,
                                             static_cast<int>(c), features.half_len);
    auto& out = series.channels[c];
    out.reserve(instances.size());
    for (const Instance& inst : instances) {
      VectorXd x = inst.features;
      if (features.zscore) {
        x.array() -= x.mean();
        const double sd = std::sqrt(x.squaredNorm() / static_cast<double>(x.size()));
        if (sd > 0.0) x /= sd;
      }
      out.push_back({inst.peak_index, detector.confidence(x)});
    }
  }
  return series;
}

void DetectionParams::validate(std::size_t channel_count) const {
  if (neighborhood < 1) throw ParameterError("neighborhood must be >= 1");
  if (!(threshold > 0.0)) throw ParameterError("threshold must be > 0");
  if (min_votes < 1 || static_cast<std::size_t>(min_votes) > channel_count) {
    throw ParameterError("min_votes must be in [1, channel count]");
  }
  if (refractory < 0) throw ParameterError("refractory must be >= 0");
}

std::vector<Beat> vote_beats(const ConfidenceSeries& series,
                             const DetectionParams& params) {
  params.validate(series.channels.size());
  struct Candidate {
    std::size_t index;
    std::size_t channel;
    double confidence;
  };
  std::vector<Candidate> cands;
  for (std::size_t c = 0; c < series.channels.size(); ++c) {
    for (const ConfidencePoint& pt : series.channels[c]) {
      if (pt.confidence >= params.threshold) {
        cands.push_back({pt.peak_index, c, pt.confidence});
      }
    }
  }
  std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
    return std::tie(a.index, a.channel) < std::tie(b.index, b.channel);
  });

  const auto nb = static_cast<std::size_t>(params.neighborhood);
  const auto refractory = static_cast<std::size_t>(params.refractory);
  std::vector<Beat> beats;
  std::size_t i = 0;
  while (i < cands.size()) {
    std::size_t j = i;
    std::vector<std::size_t> channels;
    while (j < cands.size() && cands[j].index - cands[i].index <= nb) {
      channels.push_back(cands[j].channel);
      ++j;
    }
    std::sort(channels.begin(), channels.end());
    const auto votes = static_cast<std::size_t>(
        std::unique(channels.begin(), channels.end()) - channels.begin());
    if (votes < static_cast<std::size_t>(params.min_votes)) {
      ++i;
      continue;
    }

    std::vector<std::size_t> idx;
    Beat beat;
    for (std::size_t k = i; k < j; ++k) {
      idx.push_back(cands[k].index);
      beat.confidence_sum += cands[k].confidence;
    }
    // Already sorted by index.
    const std::size_t n = idx.size();
    beat.index = n % 2 == 1 ? idx[n / 2] : (idx[n / 2 - 1] + idx[n / 2]) / 2;

    if (!beats.empty() && beat.index - beats.back().index < refractory) {
      if (beat.confidence_sum > beats.back().confidence_sum) beats.back() = beat;
    } else {
      beats.push_back(beat);
    }
    i = j;
  }
  return beats;
}

std::vector<std::size_t> beat_indices(const std::vector<Beat>& beats) {
  std::vector<std::size_t> out;
  out.reserve(beats.size());
  for (const Beat& b : beats) out.push_back(b.index);
  return out;
}

DetectionGrid DetectionGrid::standard() {
  DetectionGrid grid;
  for (int i = 0; i <= 40; ++i) {
    grid.thresholds.push_back(static_cast<double>(100 + 5 * i) / 100.0);
  }
  grid.neighborhoods = {15, 20, 25, 30, 35};
  return grid;
}

DetectionParams learn_detection_params(
    const std::vector<TrainingDetection>& training, double fs,
    const DetectionParams& base, const DetectionGrid& grid, double tolerance_s) {
  if (!(fs > 0.0)) throw ParameterError("sample rate must be positive");
  std::size_t gt_total = 0;
  for (const auto& t : training) gt_total += t.gt_beats.size();
  if (gt_total == 0) throw DataError("detection parameters need reference beats");
  if (grid.thresholds.empty() || grid.neighborhoods.empty()) {
    throw ParameterError("empty detection grid");
  }
  const auto tol = static_cast<std::size_t>(std::llround(tolerance_s * fs));

  std::vector<double> thresholds = grid.thresholds;
  std::vector<int> neighborhoods = grid.neighborhoods;
  std::sort(thresholds.begin(), thresholds.end());
  std::sort(neighborhoods.begin(), neighborhoods.end());

  DetectionParams best = base;
  double best_f1 = -1.0;
  for (double threshold : thresholds) {
    for (int nb : neighborhoods) {
      DetectionParams candidate = base;
      candidate.threshold = threshold;
      candidate.neighborhood = nb;
      BeatScore total;
      for (const auto& t : training) {
        const auto beats = beat_indices(vote_beats(t.series, candidate));
        const BeatScore s = score_beats(beats, t.gt_beats, tol);
        total.true_positives += s.true_positives;
        total.false_positives += s.false_positives;
        total.false_negatives += s.false_negatives;
      }
      const double f1 = total.f1();
      if (f1 > best_f1) {
        best_f1 = f1;
        best = candidate;
      }
    }
  }
  return best;
}

DetectionParams learn_detection_params(const Recording& training,
                                       const HsdDetector& detector,
                                       const FeatureOptions& features,
                                       const DetectionParams& base) {
  if (!training.gt_beat_times || training.gt_beat_times->empty()) {
    throw DataError("detection parameters need reference beats");
  }
  std::vector<TrainingDetection> data(1);
  data[0].series = confidence_series(training, detector, features);
  data[0].gt_beats = *training.gt_beat_times;
  return learn_detection_params(data, training.sample_rate_hz, base);
}

}  // namespace bcgmil
