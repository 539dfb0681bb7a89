#include "bcgmil/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "bcgmil/errors.hpp"

namespace bcgmil {
namespace {

constexpr double kTimeTol = 1e-6;

double mean(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

std::size_t distance(std::size_t a, std::size_t b) { return a > b ? a - b : b - a; }

}  // namespace

std::size_t HrSeries::gap_count() const {
  return static_cast<std::size_t>(std::count_if(
      samples.begin(), samples.end(), [](const HrSample& s) { return !s.bpm; }));
}

std::vector<std::pair<double, double>> aligned_pairs(const HrSeries& est,
                                                     const HrSeries& gt) {
  std::vector<std::pair<double, double>> pairs;
  std::size_t j = 0;
  for (const HrSample& e : est.samples) {
    while (j < gt.samples.size() && gt.samples[j].time_s < e.time_s - kTimeTol) ++j;
    if (j == gt.samples.size()) break;
    if (std::abs(gt.samples[j].time_s - e.time_s) > kTimeTol) continue;
    if (e.bpm && gt.samples[j].bpm) pairs.emplace_back(*e.bpm, *gt.samples[j].bpm);
  }
  return pairs;
}

double mean_absolute_error(const HrSeries& est, const HrSeries& gt) {
  const auto pairs = aligned_pairs(est, gt);
  if (pairs.empty()) throw DataError("no overlapping heart-rate samples");
  double s = 0.0;
  for (const auto& [a, b] : pairs) s += std::abs(a - b);
  return s / static_cast<double>(pairs.size());
}

std::vector<std::pair<std::size_t, std::size_t>> match_beats(
    std::span<const std::size_t> est, std::span<const std::size_t> gt,
    std::size_t tolerance_samples) {
  // (distance, est, gt) for every pair inside the tolerance. Both inputs are
  // sorted, so a sliding lower bound keeps this linear in the pair count.
  std::vector<std::tuple<std::size_t, std::size_t, std::size_t>> candidates;
  std::size_t lo = 0;
  for (std::size_t i = 0; i < est.size(); ++i) {
    while (lo < gt.size() && gt[lo] + tolerance_samples < est[i]) ++lo;
    for (std::size_t j = lo; j < gt.size() && gt[j] <= est[i] + tolerance_samples; ++j) {
      candidates.emplace_back(distance(est[i], gt[j]), i, j);
    }
  }
  std::sort(candidates.begin(), candidates.end());
  std::vector<char> est_used(est.size(), 0);
  std::vector<char> gt_used(gt.size(), 0);
  std::vector<std::pair<std::size_t, std::size_t>> matches;
  for (const auto& [dist, i, j] : candidates) {
    if (est_used[i] || gt_used[j]) continue;
    est_used[i] = gt_used[j] = 1;
    matches.emplace_back(i, j);
  }
  std::sort(matches.begin(), matches.end(),
            [](const auto& a, const auto& b) { return a.second < b.second; });
  return matches;
}

double BeatScore::f1() const {
  const double denom = 2.0 * static_cast<double>(true_positives) +
                       static_cast<double>(false_positives + false_negatives);
  if (denom == 0.0) return 0.0;
  return 2.0 * static_cast<double>(true_positives) / denom;
}

BeatScore score_beats(std::span<const std::size_t> est,
                      std::span<const std::size_t> gt,
                      std::size_t tolerance_samples) {
  const auto matches = match_beats(est, gt, tolerance_samples);
  BeatScore s;
  s.true_positives = matches.size();
  s.false_positives = est.size() - matches.size();
  s.false_negatives = gt.size() - matches.size();
  return s;
}

std::vector<std::pair<double, double>> matched_intervals(
    std::span<const std::size_t> est, std::span<const std::size_t> gt,
    double fs, double tolerance_s) {
  if (!(fs > 0.0)) throw ParameterError("sample rate must be positive");
  const auto tol = static_cast<std::size_t>(std::llround(tolerance_s * fs));
  const auto matches = match_beats(est, gt, tol);
  std::vector<std::pair<double, double>> intervals;
  for (std::size_t m = 1; m < matches.size(); ++m) {
    const auto [e0, g0] = matches[m - 1];
    const auto [e1, g1] = matches[m];
    if (g1 != g0 + 1 || e1 != e0 + 1) continue;
    intervals.emplace_back(static_cast<double>(est[e1] - est[e0]) / fs,
                           static_cast<double>(gt[g1] - gt[g0]) / fs);
  }
  return intervals;
}

double bbi_relative_error(std::span<const std::size_t> est,
                          std::span<const std::size_t> gt, double fs,
                          double tolerance_s) {
  if (est.size() < 2 || gt.size() < 2) {
    throw DataError("beat-interval error needs at least two beats each");
  }
  const auto intervals = matched_intervals(est, gt, fs, tolerance_s);
  if (intervals.empty()) throw DataError("no matched beat intervals");
  double s = 0.0;
  for (const auto& [e, g] : intervals) s += std::abs(e - g) / g;
  return 100.0 * s / static_cast<double>(intervals.size());
}

std::vector<std::pair<double, double>> per_beat_hr_pairs(
    std::span<const std::size_t> est, std::span<const std::size_t> gt,
    double fs, double tolerance_s) {
  auto intervals = matched_intervals(est, gt, fs, tolerance_s);
  for (auto& [e, g] : intervals) {
    e = 60.0 / e;
    g = 60.0 / g;
  }
  return intervals;
}

AgreementStats bland_altman(std::span<const double> est,
                            std::span<const double> gt) {
  if (est.size() != gt.size()) throw DimensionError("bland_altman: length mismatch");
  if (est.size() < 2) throw DataError("bland_altman needs at least two pairs");
  std::vector<double> diff(est.size());
  for (std::size_t i = 0; i < est.size(); ++i) diff[i] = est[i] - gt[i];
  AgreementStats s;
  s.n = diff.size();
  s.bias = mean(diff);
  double ss = 0.0;
  for (double d : diff) ss += (d - s.bias) * (d - s.bias);
  s.sd = std::sqrt(ss / static_cast<double>(diff.size() - 1));
  s.loa_low = s.bias - 1.96 * s.sd;
  s.loa_high = s.bias + 1.96 * s.sd;
  return s;
}

AgreementStats bland_altman(const std::vector<std::pair<double, double>>& pairs) {
  std::vector<double> est;
  std::vector<double> gt;
  for (const auto& [e, g] : pairs) {
    est.push_back(e);
    gt.push_back(g);
  }
  return bland_altman(est, gt);
}

double pearson_r(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DimensionError("pearson_r: length mismatch");
  if (x.size() < 2) throw DataError("pearson_r needs at least two samples");
  const double mx = mean(x);
  const double my = mean(y);
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw DataError("pearson_r: zero variance");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double paired_t(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionError("paired_t: length mismatch");
  if (a.size() < 2) throw DataError("paired_t needs at least two pairs");
  const std::size_t n = a.size();
  std::vector<double> diff(n);
  for (std::size_t i = 0; i < n; ++i) diff[i] = a[i] - b[i];
  const double m = mean(diff);
  double ss = 0.0;
  for (double d : diff) ss += (d - m) * (d - m);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  if (sd == 0.0) throw DataError("paired_t: zero spread of differences");
  return m / (sd / std::sqrt(static_cast<double>(n)));
}

}  // namespace bcgmil
