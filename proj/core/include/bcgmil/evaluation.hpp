#ifndef BCGMIL_EVALUATION_HPP_
#define BCGMIL_EVALUATION_HPP_

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace bcgmil {

struct HrSample {
  double time_s = 0.0;
  // Empty for a gap (not enough beats in the window).
  std::optional<double> bpm;
};

// Windowed heart rate; times strictly increasing.
struct HrSeries {
  std::vector<HrSample> samples;

  std::size_t size() const { return samples.size(); }
  std::size_t gap_count() const;
};

struct AgreementStats {
  double bias = 0.0;
  double sd = 0.0;
  double loa_low = 0.0;
  double loa_high = 0.0;
  std::size_t n = 0;
};

// Pairs (est, gt) of windows with equal time stamps where neither is a gap.
std::vector<std::pair<double, double>> aligned_pairs(const HrSeries& est,
                                                     const HrSeries& gt);

// Mean |est - gt| over non-gap pairs; DataError without any.
double mean_absolute_error(const HrSeries& est, const HrSeries& gt);

// One-to-one greedy matching by proximity: all pairs within tolerance are
// taken in order of increasing distance (ties: earlier estimate, then
// earlier reference). Returned as (est index, gt index), sorted by gt.
std::vector<std::pair<std::size_t, std::size_t>> match_beats(
    std::span<const std::size_t> est, std::span<const std::size_t> gt,
    std::size_t tolerance_samples);

struct BeatScore {
  std::size_t true_positives = 0;
  std::size_t false_positives = 0;
  std::size_t false_negatives = 0;
  double f1() const;
};

BeatScore score_beats(std::span<const std::size_t> est,
                      std::span<const std::size_t> gt,
                      std::size_t tolerance_samples);

// Matched beat-to-beat intervals (est, gt) in seconds. An interval counts
// when two consecutive reference beats match two consecutive estimates.
std::vector<std::pair<double, double>> matched_intervals(
    std::span<const std::size_t> est, std::span<const std::size_t> gt,
    double fs, double tolerance_s = 0.3);

// Mean |BBI_est - BBI_gt| / BBI_gt in percent.
double bbi_relative_error(std::span<const std::size_t> est,
                          std::span<const std::size_t> gt, double fs,
                          double tolerance_s = 0.3);

// Beat-to-beat heart rates (est, gt) from the matched intervals.
std::vector<std::pair<double, double>> per_beat_hr_pairs(
    std::span<const std::size_t> est, std::span<const std::size_t> gt,
    double fs, double tolerance_s = 0.3);

// Bias and 95% limits of agreement of est - gt (sd with n - 1).
AgreementStats bland_altman(std::span<const double> est,
                            std::span<const double> gt);
AgreementStats bland_altman(const std::vector<std::pair<double, double>>& pairs);

double pearson_r(std::span<const double> x, std::span<const double> y);

// t = mean(a - b) / (sd(a - b) / sqrt(n)).
double paired_t(std::span<const double> a, std::span<const double> b);

}  // namespace bcgmil

#endif  // BCGMIL_EVALUATION_HPP_
