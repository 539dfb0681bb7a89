#ifndef BCGMIL_BASELINES_HPP_
#define BCGMIL_BASELINES_HPP_

// Single-channel time-domain heart-rate estimators used as comparison points:
// window peak-to-peak deviation (WPPD) and short-term energy (EN).

#include <cstddef>
#include <span>
#include <vector>

#include "bcgmil/evaluation.hpp"
#include "bcgmil/heart_rate.hpp"
#include "bcgmil/signal.hpp"

namespace bcgmil {

struct BaselineOptions {
  // WPPD
  double wppd_window_s = 0.25;
  double smoothing_hz = 4.0;
  int smoothing_order = 2;
  // EN
  double band_low_hz = 0.4;
  double band_high_hz = 10.0;
  int band_order = 6;
  double energy_window_s = 0.3;
  // Shared
  double min_separation_s = 0.3;
  // Peaks lower than this fraction of the 95th percentile peak height are
  // discarded as ripple.
  double relative_floor = 0.1;
  // Median of (prominence / height) under which the output is flagged.
  double prominence_threshold = 0.5;
  WindowGrid grid;
};

struct BaselineResult {
  HrSeries hr;
  std::vector<std::size_t> beats;
  double median_relative_prominence = 0.0;
  bool low_confidence = true;
};

// Centered running peak-to-peak deviation over wppd_window_s, zero-phase
// low-pass smoothing, then peaks of the smoothed envelope.
BaselineResult wppd_hr(std::span<const double> signal, double fs,
                       const BaselineOptions& options = {});

// Band-pass, centered sliding energy over energy_window_s with a one-sample
// hop, then peaks of the energy curve.
BaselineResult en_hr(std::span<const double> signal, double fs,
                     const BaselineOptions& options = {});

enum class BaselineMethod { kWppd, kEn };

BaselineResult run_baseline(BaselineMethod method, std::span<const double> signal,
                            double fs, const BaselineOptions& options = {});

// Channel whose baseline HR has the lowest MAE against the reference beats
// of `training`. Channels without any overlapping window are skipped;
// DataError if no channel qualifies or there are no reference beats.
std::size_t best_baseline_channel(BaselineMethod method, const Recording& training,
                                  const BaselineOptions& options = {});

// Intermediate curves, exposed for tests and plotting. Output sample i
// covers [i - w/2, i + w - w/2 - 1], clipped to the signal.
std::vector<double> running_peak_to_peak(std::span<const double> x,
                                         std::size_t window);
std::vector<double> sliding_energy(std::span<const double> x, std::size_t window);

}  // namespace bcgmil

#endif  // BCGMIL_BASELINES_HPP_
