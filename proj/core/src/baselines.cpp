#include "bcgmil/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "bcgmil/errors.hpp"
#include "bcgmil/filter.hpp"

namespace bcgmil {

namespace {

std::size_t samples_for(double seconds, double fs) {
  return static_cast<std::size_t>(std::max<long long>(1, std::llround(seconds * fs)));
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<long>(mid), v.end());
  double m = v[mid];
  if (v.size() % 2 == 0) {
    m = 0.5 * (m + *std::max_element(v.begin(), v.begin() + static_cast<long>(mid)));
  }
  return m;
}

// Peaks of a non-negative curve, ripple removal and the prominence summary.
BaselineResult beats_from_curve(const std::vector<double>& curve, double fs,
                                const BaselineOptions& options) {
  const std::size_t sep = samples_for(options.min_separation_s, fs);
  std::vector<std::size_t> peaks;
  for (std::size_t p : find_peaks(curve, sep)) {
    if (curve[p] > 0.0) peaks.push_back(p);
  }

  if (!peaks.empty()) {
    std::vector<double> heights;
    for (std::size_t p : peaks) heights.push_back(curve[p]);
    std::sort(heights.begin(), heights.end());
    const auto rank = static_cast<std::size_t>(0.95 * static_cast<double>(heights.size() - 1));
    const double floor = options.relative_floor * heights[rank];
    std::erase_if(peaks, [&](std::size_t p) { return curve[p] < floor; });
  }

  BaselineResult result;
  std::vector<double> relative;
  for (std::size_t p : peaks) {
    const std::size_t lo = p >= sep ? p - sep : 0;
    const std::size_t hi = std::min(curve.size() - 1, p + sep);
    double left = curve[p];
    double right = curve[p];
    for (std::size_t i = lo; i < p; ++i) left = std::min(left, curve[i]);
    for (std::size_t i = p + 1; i <= hi; ++i) right = std::min(right, curve[i]);
    relative.push_back((curve[p] - std::max(left, right)) / curve[p]);
  }
  result.beats = std::move(peaks);
  result.median_relative_prominence = median(relative);
  result.low_confidence =
      result.beats.empty() || result.median_relative_prominence < options.prominence_threshold;
  const double duration = static_cast<double>(curve.size()) / fs;
  result.hr = hr_from_beats(result.beats, fs, duration, options.grid);
  return result;
}

}  // namespace

std::vector<double> running_peak_to_peak(std::span<const double> x,
                                         std::size_t window) {
  if (window == 0) throw ParameterError("window must be >= 1");
  const std::size_t n = x.size();
  const std::size_t back = window / 2;
  const std::size_t ahead = window - back - 1;
  std::vector<double> out(n);
  // Monotonic index queues for the running max and min.
  std::deque<std::size_t> hi;
  std::deque<std::size_t> lo;
  std::size_t next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t end = std::min(n, i + ahead + 1);
    for (; next < end; ++next) {
      while (!hi.empty() && x[hi.back()] <= x[next]) hi.pop_back();
      while (!lo.empty() && x[lo.back()] >= x[next]) lo.pop_back();
      hi.push_back(next);
      lo.push_back(next);
    }
    const std::size_t begin = i >= back ? i - back : 0;
    while (hi.front() < begin) hi.pop_front();
    while (lo.front() < begin) lo.pop_front();
    out[i] = x[hi.front()] - x[lo.front()];
  }
  return out;
}

std::vector<double> sliding_energy(std::span<const double> x, std::size_t window) {
  if (window == 0) throw ParameterError("window must be >= 1");
  const std::size_t n = x.size();
  const std::size_t back = window / 2;
  const std::size_t ahead = window - back - 1;
  std::vector<double> prefix(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + x[i] * x[i];
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t begin = i >= back ? i - back : 0;
    const std::size_t end = std::min(n, i + ahead + 1);
    // Prefix differences can dip a hair below zero.
    out[i] = std::max(0.0, prefix[end] - prefix[begin]);
  }
  return out;
}

BaselineResult wppd_hr(std::span<const double> signal, double fs,
                       const BaselineOptions& options) {
  if (!(fs > 8.0)) throw ParameterError("WPPD needs fs > 8 Hz");
  const std::size_t window = samples_for(options.wppd_window_s, fs);
  if (signal.size() < window) throw DataError("signal shorter than one window");
  const auto envelope = running_peak_to_peak(signal, window);
  auto smooth = lowpass_filter(envelope, fs, options.smoothing_hz, options.smoothing_order);
  return beats_from_curve(smooth, fs, options);
}

BaselineResult en_hr(std::span<const double> signal, double fs,
                     const BaselineOptions& options) {
  if (!(fs > 20.0)) throw ParameterError("EN needs fs > 20 Hz");
  const std::size_t window = samples_for(options.energy_window_s, fs);
  if (signal.size() < window) throw DataError("signal shorter than one window");
  const auto filtered = bandpass_filter(signal, fs, options.band_low_hz,
                                        options.band_high_hz, options.band_order);
  return beats_from_curve(sliding_energy(filtered, window), fs, options);
}

BaselineResult run_baseline(BaselineMethod method, std::span<const double> signal,
                            double fs, const BaselineOptions& options) {
  return method == BaselineMethod::kWppd ? wppd_hr(signal, fs, options)
                                         : en_hr(signal, fs, options);
}

std::size_t best_baseline_channel(BaselineMethod method, const Recording& training,
                                  const BaselineOptions& options) {
  training.validate();
  if (!training.gt_beat_times || training.gt_beat_times->empty()) {
    throw DataError("channel selection needs reference beats");
  }
  const double fs = training.sample_rate_hz;
  const HrSeries reference =
      hr_from_beats(*training.gt_beat_times, fs, training.duration_s(), options.grid);
  std::size_t best = training.channels.size();
  double best_mae = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < training.channels.size(); ++c) {
    const auto result = run_baseline(method, training.channels[c], fs, options);
    try {
      const double mae = mean_absolute_error(result.hr, reference);
      if (mae < best_mae) {
        best_mae = mae;
        best = c;
      }
    } catch (const DataError&) {
      // No overlapping window on this channel.
    }
  }
  if (best == training.channels.size()) throw DataError("no channel yields a heart rate");
  return best;
}

}  // namespace bcgmil
