#ifndef BCGMIL_SIGNAL_HPP_
#define BCGMIL_SIGNAL_HPP_

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace bcgmil {

// Multichannel bed-sensor recording. gt_beat_times holds sample indices of
// confirmed reference beats when a reference sensor was attached.
struct Recording {
  std::vector<std::vector<double>> channels;
  double sample_rate_hz = 100.0;
  std::optional<std::vector<std::size_t>> gt_beat_times;

  std::size_t num_samples() const {
    return channels.empty() ? 0 : channels.front().size();
  }
  double duration_s() const {
    return static_cast<double>(num_samples()) / sample_rate_hz;
  }
  // Throws ParameterError / DataError when the invariants do not hold.
  void validate() const;
};

// A fixed-length segment centered on a candidate J-peak.
struct Instance {
  Eigen::VectorXd features;
  int channel_id = 0;
  std::size_t peak_index = 0;
};

enum class BagLabel { kNegative = 0, kPositive = 1 };

struct Bag {
  std::vector<Instance> instances;
  BagLabel label = BagLabel::kNegative;
  std::optional<std::size_t> anchor_time;

  bool positive() const { return label == BagLabel::kPositive; }
};

// Indices of strict local maxima, thinned so that any two kept peaks are at
// least min_separation samples apart. On conflict the larger value wins, and
// the earlier index on an exact tie.
std::vector<std::size_t> find_peaks(std::span<const double> signal,
                                    std::size_t min_separation);

// One instance per peak whose window [peak - half_len, peak + half_len] lies
// inside the signal. Boundary peaks are skipped.
std::vector<Instance> extract_instances(std::span<const double> signal,
                                        std::span<const std::size_t> peaks,
                                        int channel_id = 0,
                                        std::size_t half_len = 45);

// Groups per-channel instances into labeled bags around reference beats.
//
// Every instance is assigned to its nearest beat (ties go to the earlier
// beat). For each beat, the per_positive instances of each channel closest
// to it (ties go to the earlier peak) form the positive bag. Whatever is left
// is grouped by the gap between consecutive beats into negative bags,
// including the stretch before the first and after the last beat. Empty bags
// are not emitted. Bags come out in time order.
std::vector<Bag> build_bags(
    const std::vector<std::vector<Instance>>& per_channel_instances,
    std::span<const std::size_t> gt_beat_times, std::size_t per_positive = 3);

struct FeatureOptions {
  double low_hz = 0.4;
  double high_hz = 10.0;
  int filter_order = 6;
  std::size_t min_separation = 10;
  std::size_t half_len = 45;
  // Scale every instance to zero mean and unit variance.
  bool zscore = false;

  std::size_t dimension() const { return 2 * half_len + 1; }
};

// Filter, find candidate peaks and cut instances on every channel.
std::vector<std::vector<Instance>> extract_recording_instances(
    const Recording& recording, const FeatureOptions& options = {});

// The per-channel filtered signals used by extract_recording_instances.
std::vector<std::vector<double>> filter_recording(
    const Recording& recording, const FeatureOptions& options = {});

// Bags for a whole recording; requires reference beats.
std::vector<Bag> recording_bags(const Recording& recording,
                                const FeatureOptions& options = {},
                                std::size_t per_positive = 3);

}  // namespace bcgmil

#endif  // BCGMIL_SIGNAL_HPP_
