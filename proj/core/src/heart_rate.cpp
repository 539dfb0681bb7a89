#include "bcgmil/heart_rate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "bcgmil/errors.hpp"

namespace bcgmil {

std::vector<double> WindowGrid::starts(double duration_s) const {
  if (!(window_s > 0.0) || !(step_s > 0.0)) {
    throw ParameterError("window and step must be positive");
  }
  std::vector<double> out;
  for (int k = 0;; ++k) {
    const double start = step_s * k;
    if (start + window_s > duration_s + 1e-9) break;
    out.push_back(start);
  }
  return out;
}

HrSeries hr_from_beats(std::span<const std::size_t> beat_indices, double fs,
                       double duration_s, const WindowGrid& grid) {
  if (!(fs > 0.0)) throw ParameterError("sample rate must be positive");
  HrSeries series;
  for (double start : grid.starts(duration_s)) {
    const double end = start + grid.window_s;
    // Accumulate offsets from the first rate so a perfectly periodic train
    // averages to exactly 60 / period.
    double first = 0.0;
    double offset_sum = 0.0;
    int count = 0;
    bool have_prev = false;
    std::size_t prev = 0;
    for (std::size_t idx : beat_indices) {
      const double t = static_cast<double>(idx) / fs;
      if (t < start) continue;
      if (t >= end) break;
      if (have_prev && idx > prev) {
        const double rate = 60.0 * fs / static_cast<double>(idx - prev);
        if (count == 0) first = rate;
        offset_sum += rate - first;
        ++count;
      }
      prev = idx;
      have_prev = true;
    }
    HrSample s;
    s.time_s = start + grid.window_s / 2.0;
    if (count > 0) s.bpm = first + offset_sum / count;
    series.samples.push_back(s);
  }
  return series;
}

HrSeries hr_from_confidence_dft(const ConfidenceSeries& series, double fs,
                                double duration_s, const WindowGrid& grid,
                                const DftOptions& options) {
  if (!(fs > 0.0)) throw ParameterError("sample rate must be positive");
  if (!(options.band_low_hz > 0.0) || !(options.band_high_hz > options.band_low_hz)) {
    throw ParameterError("bad DFT search band");
  }
  const auto n = static_cast<std::size_t>(std::llround(grid.window_s * fs));
  if (n < 2) throw ParameterError("DFT window too short");

  std::vector<double> cos_table(n);
  std::vector<double> sin_table(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(i) /
                         static_cast<double>(n);
    cos_table[i] = std::cos(angle);
    sin_table[i] = std::sin(angle);
  }
  const double resolution = fs / static_cast<double>(n);
  const auto k_lo = static_cast<std::size_t>(std::ceil(options.band_low_hz / resolution - 1e-9));
  const auto k_hi = std::min<std::size_t>(
      static_cast<std::size_t>(std::floor(options.band_high_hz / resolution + 1e-9)),
      n / 2);

  HrSeries out;
  for (double start_s : grid.starts(duration_s)) {
    const auto start = static_cast<std::size_t>(std::llround(start_s * fs));
    HrSample sample;
    sample.time_s = start_s + grid.window_s / 2.0;

    double best_mag = 0.0;
    std::size_t best_k = 0;
    double scale = 0.0;
    bool any = false;
    for (const auto& channel : series.channels) {
      // Offsets and values of this channel's samples inside the window.
      std::vector<std::pair<std::size_t, double>> pts;
      for (const ConfidencePoint& pt : channel) {
        if (pt.peak_index < start) continue;
        if (pt.peak_index >= start + n) break;
        pts.emplace_back(pt.peak_index - start, pt.confidence);
        scale += std::abs(pt.confidence);
      }
      if (pts.empty()) continue;
      any = true;
      // Removing the window mean only changes bin 0, which is never in the
      // search band, so the zero-filled series can be summed sparsely.
      for (std::size_t k = std::max<std::size_t>(k_lo, 1); k <= k_hi; ++k) {
        double re = 0.0;
        double im = 0.0;
        for (const auto& [offset, value] : pts) {
          const std::size_t phase = (k * offset) % n;
          re += value * cos_table[phase];
          im -= value * sin_table[phase];
        }
        const double mag = std::hypot(re, im);
        if (mag > best_mag) {
          best_mag = mag;
          best_k = k;
        }
      }
    }
    if (any && best_k > 0 && best_mag > 1e-9 * scale) {
      sample.bpm = 60.0 * resolution * static_cast<double>(best_k);
    }
    out.samples.push_back(sample);
  }
  return out;
}

}  // namespace bcgmil
