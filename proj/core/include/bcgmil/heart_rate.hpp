#ifndef BCGMIL_HEART_RATE_HPP_
#define BCGMIL_HEART_RATE_HPP_

#include <cstddef>
#include <span>
#include <vector>

#include "bcgmil/detector.hpp"
#include "bcgmil/evaluation.hpp"

namespace bcgmil {

// Sliding analysis windows [start, start + window_s) advanced by step_s,
// covering [0, duration_s]. Only whole windows are produced.
struct WindowGrid {
  double window_s = 60.0;
  double step_s = 15.0;

  std::vector<double> starts(double duration_s) const;
};

// Per window, the mean of 60 / interval over beat-to-beat intervals whose
// both beats fall inside the window; a gap when there are none. Samples are
// stamped at window centers.
HrSeries hr_from_beats(std::span<const std::size_t> beat_indices, double fs,
                       double duration_s, const WindowGrid& grid = {});

struct DftOptions {
  double band_low_hz = 0.66;
  double band_high_hz = 3.0;
};

// Per window, every channel's confidences are dropped onto a zero-filled
// uniform series at fs, mean-subtracted and transformed; the in-band bin
// with the largest magnitude over all channels gives the rate. Windows with
// no confidence samples, or no in-band energy, are gaps.
HrSeries hr_from_confidence_dft(const ConfidenceSeries& series, double fs,
                                double duration_s, const WindowGrid& grid = {},
                                const DftOptions& options = {});

}  // namespace bcgmil

#endif  // BCGMIL_HEART_RATE_HPP_
