#include "bcgmil/signal.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <tuple>

#include "bcgmil/errors.hpp"
#include "bcgmil/filter.hpp"

namespace bcgmil {

void Recording::validate() const {
  if (!(sample_rate_hz > 0.0) || !std::isfinite(sample_rate_hz)) {
    throw ParameterError("sample rate must be positive");
  }
  if (channels.empty()) throw DataError("recording has no channels");
  const std::size_t n = channels.front().size();
  for (const auto& ch : channels) {
    if (ch.size() != n) throw DataError("channels differ in length");
  }
  if (gt_beat_times) {
    const auto& gt = *gt_beat_times;
    for (std::size_t i = 0; i < gt.size(); ++i) {
      if (gt[i] >= n) throw DataError("reference beat outside the signal");
      if (i > 0 && gt[i] <= gt[i - 1]) {
        throw DataError("reference beats must be strictly increasing");
      }
    }
  }
}

std::vector<std::size_t> find_peaks(std::span<const double> signal,
                                    std::size_t min_separation) {
  if (min_separation < 1) throw ParameterError("min_separation must be >= 1");
  std::vector<std::size_t> candidates;
  for (std::size_t i = 1; i + 1 < signal.size(); ++i) {
    if (signal[i] > signal[i - 1] && signal[i] > signal[i + 1]) {
      candidates.push_back(i);
    }
  }
  if (min_separation == 1 || candidates.size() < 2) return candidates;

  // Highest first; stable sort keeps the earlier index first on ties.
  std::vector<std::size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return signal[candidates[a]] > signal[candidates[b]];
  });

  std::vector<char> removed(candidates.size(), 0);
  for (std::size_t pos : order) {
    if (removed[pos]) continue;
    const std::size_t peak = candidates[pos];
    for (std::size_t j = pos; j-- > 0;) {
      if (peak - candidates[j] >= min_separation) break;
      removed[j] = 1;
    }
    for (std::size_t j = pos + 1; j < candidates.size(); ++j) {
      if (candidates[j] - peak >= min_separation) break;
      removed[j] = 1;
    }
  }

  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (!removed[i]) kept.push_back(candidates[i]);
  }
  return kept;
}

std::vector<Instance> extract_instances(std::span<const double> signal,
                                        std::span<const std::size_t> peaks,
                                        int channel_id, std::size_t half_len) {
  if (half_len < 1) throw ParameterError("half_len must be >= 1");
  const std::size_t d = 2 * half_len + 1;
  std::vector<Instance> out;
  for (std::size_t peak : peaks) {
    if (peak < half_len || peak + half_len >= signal.size()) continue;
    Instance inst;
    inst.features = Eigen::Map<const Eigen::VectorXd>(
        signal.data() + (peak - half_len), static_cast<Eigen::Index>(d));
    inst.channel_id = channel_id;
    inst.peak_index = peak;
    out.push_back(std::move(inst));
  }
  return out;
}

std::vector<Bag> build_bags(
    const std::vector<std::vector<Instance>>& per_channel_instances,
    std::span<const std::size_t> gt_beat_times, std::size_t per_positive) {
  const std::size_t num_beats = gt_beat_times.size();
  const std::size_t num_channels = per_channel_instances.size();

  if (num_beats == 0) {
    Bag all;
    for (const auto& channel : per_channel_instances) {
      all.instances.insert(all.instances.end(), channel.begin(), channel.end());
    }
    if (all.instances.empty()) return {};
    return {std::move(all)};
  }
  for (std::size_t i = 1; i < num_beats; ++i) {
    if (gt_beat_times[i] <= gt_beat_times[i - 1]) {
      throw DataError("reference beats must be strictly increasing");
    }
  }

  auto distance = [](std::size_t a, std::size_t b) {
    return a > b ? a - b : b - a;
  };
  auto nearest_beat = [&](std::size_t peak) {
    const auto it =
        std::lower_bound(gt_beat_times.begin(), gt_beat_times.end(), peak);
    const auto upper = static_cast<std::size_t>(it - gt_beat_times.begin());
    if (upper == 0) return std::size_t{0};
    if (upper == num_beats) return num_beats - 1;
    const std::size_t lower = upper - 1;
    return distance(peak, gt_beat_times[lower]) <=
                   distance(peak, gt_beat_times[upper])
               ? lower
               : upper;
  };

  // selected[c][i]: instance i of channel c joined a positive bag.
  std::vector<std::vector<char>> selected(num_channels);
  // members[beat][c]: instance indices chosen for that beat on channel c.
  std::vector<std::vector<std::vector<std::size_t>>> members(
      num_beats, std::vector<std::vector<std::size_t>>(num_channels));

  for (std::size_t c = 0; c < num_channels; ++c) {
    const auto& channel = per_channel_instances[c];
    selected[c].assign(channel.size(), 0);
    // (beat, distance, peak, instance)
    std::vector<std::tuple<std::size_t, std::size_t, std::size_t, std::size_t>>
        ranked;
    ranked.reserve(channel.size());
    for (std::size_t i = 0; i < channel.size(); ++i) {
      const std::size_t peak = channel[i].peak_index;
      const std::size_t beat = nearest_beat(peak);
      ranked.emplace_back(beat, distance(peak, gt_beat_times[beat]), peak, i);
    }
    std::sort(ranked.begin(), ranked.end());
    for (const auto& [beat, dist, peak, i] : ranked) {
      auto& chosen = members[beat][c];
      if (chosen.size() < per_positive) {
        chosen.push_back(i);
        selected[c][i] = 1;
      }
    }
    for (auto& beat_members : members) {
      std::sort(beat_members[c].begin(), beat_members[c].end());
    }
  }

  // Leftovers grouped by gap: gap g holds peaks with g beats at or before it.
  std::vector<Bag> negatives(num_beats + 1);
  for (std::size_t c = 0; c < num_channels; ++c) {
    const auto& channel = per_channel_instances[c];
    for (std::size_t i = 0; i < channel.size(); ++i) {
      if (selected[c][i]) continue;
      const std::size_t gap = static_cast<std::size_t>(
          std::upper_bound(gt_beat_times.begin(), gt_beat_times.end(),
                           channel[i].peak_index) -
          gt_beat_times.begin());
      negatives[gap].instances.push_back(channel[i]);
    }
  }

  std::vector<Bag> bags;
  for (std::size_t g = 0; g <= num_beats; ++g) {
    if (!negatives[g].instances.empty()) {
      negatives[g].label = BagLabel::kNegative;
      bags.push_back(std::move(negatives[g]));
    }
    if (g == num_beats) break;
    Bag positive;
    positive.label = BagLabel::kPositive;
    positive.anchor_time = gt_beat_times[g];
    for (std::size_t c = 0; c < num_channels; ++c) {
      for (std::size_t i : members[g][c]) {
        positive.instances.push_back(per_channel_instances[c][i]);
      }
    }
    if (!positive.instances.empty()) bags.push_back(std::move(positive));
  }
  return bags;
}

std::vector<std::vector<double>> filter_recording(
    const Recording& recording, const FeatureOptions& options) {
  recording.validate();
  const SosFilter sos =
      butterworth_bandpass(recording.sample_rate_hz, options.low_hz,
                           options.high_hz, options.filter_order);
  std::vector<std::vector<double>> filtered;
  filtered.reserve(recording.channels.size());
  for (const auto& channel : recording.channels) {
    filtered.push_back(filtfilt(sos, channel));
  }
  return filtered;
}

std::vector<std::vector<Instance>> extract_recording_instances(
    const Recording& recording, const FeatureOptions& options) {
  const auto filtered = filter_recording(recording, options);
  std::vector<std::vector<Instance>> per_channel;
  per_channel.reserve(filtered.size());
  for (std::size_t c = 0; c < filtered.size(); ++c) {
    const auto peaks = find_peaks(filtered[c], options.min_separation);
    auto instances = extract_instances(filtered[c], peaks, static_cast<int>(c),
                                       options.half_len);
    if (options.zscore) {
      for (auto& inst : instances) {
        const double mean = inst.features.mean();
        inst.features.array() -= mean;
        const double sd = std::sqrt(inst.features.squaredNorm() /
                                    static_cast<double>(inst.features.size()));
        if (sd > 0.0) inst.features /= sd;
      }
    }
    per_channel.push_back(std::move(instances));
  }
  return per_channel;
}

std::vector<Bag> recording_bags(const Recording& recording,
                                const FeatureOptions& options,
                                std::size_t per_positive) {
  if (!recording.gt_beat_times || recording.gt_beat_times->empty()) {
    throw DataError("recording has no reference beats");
  }
  return build_bags(extract_recording_instances(recording, options),
                    *recording.gt_beat_times, per_positive);
}

}  // namespace bcgmil
