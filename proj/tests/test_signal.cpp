#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "bcgmil/errors.hpp"
#include "bcgmil/filter.hpp"
#include "bcgmil/signal.hpp"
#include "bcgmil/synth.hpp"
#include "support/fixtures.hpp"

namespace bcgmil {
namespace {

std::vector<double> sinusoid(double f_hz, double fs, double seconds) {
  const auto n = static_cast<std::size_t>(seconds * fs);
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = std::sin(2.0 * std::numbers::pi * f_hz * static_cast<double>(i) / fs);
  }
  return x;
}

// Peak absolute value over the middle half, away from edge transients.
double steady_amplitude(const std::vector<double>& y) {
  double a = 0.0;
  for (std::size_t i = y.size() / 4; i < 3 * y.size() / 4; ++i) a = std::max(a, std::abs(y[i]));
  return a;
}

// --- filter -------------------------------------------------------------

TEST(Bandpass, RemovesDc) {
  const std::vector<double> x(6000, 1.0);
  EXPECT_LT(steady_amplitude(bandpass_filter(x, 100.0, 0.4, 10.0, 6)), 0.01);
}

TEST(Bandpass, PassbandIsFlat) {
  const auto y = bandpass_filter(sinusoid(2.0, 100.0, 60.0), 100.0, 0.4, 10.0, 6);
  const double a = steady_amplitude(y);
  EXPECT_GE(a, 0.95);
  EXPECT_LE(a, 1.05);
}

TEST(Bandpass, HalfPowerAtLowCutoff) {
  const auto y = bandpass_filter(sinusoid(0.4, 100.0, 200.0), 100.0, 0.4, 10.0, 6);
  EXPECT_NEAR(steady_amplitude(y), std::pow(10.0, -3.0 / 20.0), 0.04);
}

TEST(Bandpass, HalfPowerAtHighCutoff) {
  const auto y = bandpass_filter(sinusoid(10.0, 100.0, 60.0), 100.0, 0.4, 10.0, 6);
  EXPECT_NEAR(steady_amplitude(y), std::pow(10.0, -3.0 / 20.0), 0.04);
}

TEST(Bandpass, ZeroPhaseResponseWithinHalfDecibelAtCutoffs) {
  const SosFilter sos = butterworth_bandpass(100.0, 0.4, 10.0, 6);
  for (double f : {0.4, 10.0}) {
    // Forward-backward squares the single-pass magnitude.
    const double two_pass = std::norm(frequency_response(sos, f, 100.0));
    EXPECT_NEAR(20.0 * std::log10(two_pass), -3.0, 0.5) << f << " Hz";
  }
}

TEST(Bandpass, MeasuredGainMatchesDesignResponse) {
  const SosFilter sos = butterworth_bandpass(100.0, 0.4, 10.0, 6);
  for (double f : {1.0, 3.0, 8.0, 12.0}) {
    const auto y = filtfilt(sos, sinusoid(f, 100.0, 60.0));
    EXPECT_NEAR(steady_amplitude(y), std::norm(frequency_response(sos, f, 100.0)), 2e-3)
        << f << " Hz";
  }
}

TEST(Bandpass, IsLinear) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  std::vector<double> x(3000);
  std::vector<double> y(3000);
  for (auto& v : x) v = g(rng);
  for (auto& v : y) v = g(rng);
  std::vector<double> mix(3000);
  for (std::size_t i = 0; i < mix.size(); ++i) mix[i] = 2.5 * x[i] - 0.7 * y[i];
  const auto fx = bandpass_filter(x, 100.0, 0.4, 10.0);
  const auto fy = bandpass_filter(y, 100.0, 0.4, 10.0);
  const auto fm = bandpass_filter(mix, 100.0, 0.4, 10.0);
  double err = 0.0;
  double scale = 0.0;
  for (std::size_t i = 0; i < fm.size(); ++i) {
    err = std::max(err, std::abs(fm[i] - (2.5 * fx[i] - 0.7 * fy[i])));
    scale = std::max(scale, std::abs(fm[i]));
  }
  EXPECT_LT(err, 1e-9 * scale);
}

TEST(Bandpass, PreservesLength) {
  EXPECT_EQ(bandpass_filter(sinusoid(1.0, 100.0, 3.7), 100.0, 0.4, 10.0).size(), 370u);
}

TEST(Bandpass, InvalidParameters) {
  const std::vector<double> x(500, 0.0);
  EXPECT_THROW(bandpass_filter(x, 100.0, 10.0, 0.4), ParameterError);
  EXPECT_THROW(bandpass_filter(x, 100.0, 0.4, 50.0), ParameterError);
  EXPECT_THROW(bandpass_filter(x, 0.0, 0.4, 10.0), ParameterError);
  EXPECT_THROW(bandpass_filter(x, 100.0, 0.4, 10.0, 5), ParameterError);
  EXPECT_THROW(bandpass_filter(x, 100.0, 0.0, 10.0), ParameterError);
}

TEST(Lowpass, PassesDcAndRejectsHighFrequencies) {
  const std::vector<double> dc(2000, 3.0);
  EXPECT_NEAR(steady_amplitude(lowpass_filter(dc, 100.0, 4.0, 2)), 3.0, 1e-9);
  EXPECT_LT(steady_amplitude(lowpass_filter(sinusoid(30.0, 100.0, 20.0), 100.0, 4.0, 2)), 0.02);
}

// --- peaks --------------------------------------------------------------

TEST(FindPeaks, SingleMaximum) {
  const std::vector<double> x{1.0, 3.0, 2.0};
  EXPECT_EQ(find_peaks(x, 1), (std::vector<std::size_t>{1}));
}

TEST(FindPeaks, MonotoneHasNone) {
  std::vector<double> x(50);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = static_cast<double>(i);
  EXPECT_TRUE(find_peaks(x, 1).empty());
}

TEST(FindPeaks, SinusoidQuarterPeriods) {
  EXPECT_EQ(find_peaks(sinusoid(1.0, 100.0, 5.0), 10),
            (std::vector<std::size_t>{25, 125, 225, 325, 425}));
}

TEST(FindPeaks, EmptyInput) { EXPECT_TRUE(find_peaks(std::vector<double>{}, 3).empty()); }

TEST(FindPeaks, PlateauIsNotStrictMaximum) {
  const std::vector<double> x{0.0, 2.0, 2.0, 0.0};
  EXPECT_TRUE(find_peaks(x, 1).empty());
}

TEST(FindPeaks, LargerPeakWinsConflict) {
  const std::vector<double> x{0.0, 1.0, 0.0, 5.0, 0.0, 2.0, 0.0};
  EXPECT_EQ(find_peaks(x, 3), (std::vector<std::size_t>{3}));
}

TEST(FindPeaks, EarlierPeakWinsExactTie) {
  const std::vector<double> x{0.0, 4.0, 0.0, 4.0, 0.0};
  EXPECT_EQ(find_peaks(x, 3), (std::vector<std::size_t>{1}));
}

TEST(FindPeaks, PropertiesOnNoise) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g;
  std::vector<double> x(2000);
  for (auto& v : x) v = g(rng);
  for (std::size_t sep : {1u, 4u, 10u, 37u}) {
    const auto peaks = find_peaks(x, sep);
    ASSERT_FALSE(peaks.empty());
    for (std::size_t k = 0; k < peaks.size(); ++k) {
      const std::size_t i = peaks[k];
      ASSERT_GT(i, 0u);
      ASSERT_LT(i + 1, x.size());
      EXPECT_GT(x[i], x[i - 1]);
      EXPECT_GT(x[i], x[i + 1]);
      if (k > 0) EXPECT_GE(i - peaks[k - 1], sep);
    }
    // Shift invariance.
    std::vector<double> shifted = x;
    for (auto& v : shifted) v += 17.25;
    EXPECT_EQ(find_peaks(shifted, sep), peaks);
  }
}

TEST(FindPeaks, ZeroSeparationRejected) {
  EXPECT_THROW(find_peaks(std::vector<double>{0, 1, 0}, 0), ParameterError);
}

// --- instances ----------------------------------------------------------

TEST(ExtractInstances, ExactFit) {
  std::vector<double> x(91);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::sin(0.3 * static_cast<double>(i));
  const std::vector<std::size_t> peaks{45};
  const auto inst = extract_instances(x, peaks, 2, 45);
  ASSERT_EQ(inst.size(), 1u);
  EXPECT_EQ(inst[0].channel_id, 2);
  EXPECT_EQ(inst[0].peak_index, 45u);
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_EQ(inst[0].features[static_cast<Eigen::Index>(i)], x[i]);
}

TEST(ExtractInstances, BoundaryPeakSkipped) {
  const std::vector<double> x(500, 0.0);
  const std::vector<std::size_t> peaks{10, 460};
  EXPECT_TRUE(extract_instances(x, peaks, 0, 45).empty());
}

TEST(ExtractInstances, InteriorPeaks) {
  const std::vector<double> x(1000, 1.0);
  const std::vector<std::size_t> peaks{100, 250, 400, 600, 900};
  const auto inst = extract_instances(x, peaks);
  ASSERT_EQ(inst.size(), 5u);
  for (const auto& i : inst) EXPECT_EQ(i.features.size(), 91);
}

// --- bags ---------------------------------------------------------------

std::vector<Instance> fake_instances(int channel, std::vector<std::size_t> peaks) {
  std::vector<Instance> out;
  for (std::size_t p : peaks) {
    Instance inst;
    inst.features = Eigen::VectorXd::Constant(3, static_cast<double>(p));
    inst.channel_id = channel;
    inst.peak_index = p;
    out.push_back(inst);
  }
  return out;
}

std::size_t total_size(const std::vector<Bag>& bags) {
  std::size_t n = 0;
  for (const auto& b : bags) n += b.instances.size();
  return n;
}

TEST(BuildBags, OneBeatFourChannels) {
  std::vector<std::vector<Instance>> chans;
  for (int c = 0; c < 4; ++c) chans.push_back(fake_instances(c, {80, 95, 100, 104, 130}));
  const std::vector<std::size_t> gt{100};
  const auto bags = build_bags(chans, gt);
  std::size_t positives = 0;
  for (const auto& b : bags) {
    if (!b.positive()) continue;
    ++positives;
    EXPECT_EQ(b.instances.size(), 12u);
    EXPECT_EQ(b.anchor_time, std::optional<std::size_t>(100));
    for (const auto& i : b.instances) {
      EXPECT_TRUE(i.peak_index == 95 || i.peak_index == 100 || i.peak_index == 104);
    }
  }
  EXPECT_EQ(positives, 1u);
  EXPECT_EQ(total_size(bags), 20u);
}

TEST(BuildBags, NearestTieGoesToEarlierPeak) {
  std::vector<std::vector<Instance>> chans{fake_instances(0, {90, 110, 150})};
  const std::vector<std::size_t> gt{100};
  const auto bags = build_bags(chans, gt, 1);
  for (const auto& b : bags) {
    if (b.positive()) {
      ASSERT_EQ(b.instances.size(), 1u);
      EXPECT_EQ(b.instances[0].peak_index, 90u);
    }
  }
}

TEST(BuildBags, NoReferenceGivesSingleNegativeBag) {
  std::vector<std::vector<Instance>> chans{fake_instances(0, {10, 20}),
                                           fake_instances(1, {15})};
  const auto bags = build_bags(chans, {});
  ASSERT_EQ(bags.size(), 1u);
  EXPECT_FALSE(bags[0].positive());
  EXPECT_EQ(bags[0].instances.size(), 3u);
}

TEST(BuildBags, FewerPeaksThanRequested) {
  std::vector<std::vector<Instance>> chans{fake_instances(0, {100}), fake_instances(1, {})};
  const std::vector<std::size_t> gt{100};
  const auto bags = build_bags(chans, gt);
  ASSERT_EQ(bags.size(), 1u);
  EXPECT_TRUE(bags[0].positive());
  EXPECT_EQ(bags[0].instances.size(), 1u);
}

TEST(BuildBags, SyntheticRecordingPartition) {
  const SynthOutput s = generate(fixtures::training_config(11));
  const auto per_channel = extract_recording_instances(s.recording);
  std::size_t total = 0;
  for (const auto& ch : per_channel) total += ch.size();
  const auto bags = build_bags(per_channel, *s.recording.gt_beat_times);
  EXPECT_EQ(total_size(bags), total);

  std::size_t positives = 0;
  std::vector<std::pair<int, std::size_t>> seen;
  for (const auto& b : bags) {
    EXPECT_FALSE(b.instances.empty());
    if (b.positive()) {
      ++positives;
      std::vector<int> per(4, 0);
      for (const auto& i : b.instances) ++per[static_cast<std::size_t>(i.channel_id)];
      for (int n : per) EXPECT_LE(n, 3);
    }
    for (const auto& i : b.instances) seen.emplace_back(i.channel_id, i.peak_index);
  }
  std::sort(seen.begin(), seen.end());
  EXPECT_EQ(std::adjacent_find(seen.begin(), seen.end()), seen.end());
  EXPECT_EQ(positives, s.recording.gt_beat_times->size());
  EXPECT_NEAR(static_cast<double>(positives), 300.0, 2.0);
}

TEST(RecordingBags, RequiresReference) {
  Recording r = generate(fixtures::clean_config(60.0, 20.0)).recording;
  r.gt_beat_times.reset();
  EXPECT_THROW(recording_bags(r), DataError);
}

TEST(Recording, Validation) {
  Recording r;
  EXPECT_THROW(r.validate(), DataError);
  r.channels = {{0.0, 1.0}, {0.0}};
  EXPECT_THROW(r.validate(), DataError);
  r.channels = {{0.0, 1.0}, {0.0, 2.0}};
  r.gt_beat_times = std::vector<std::size_t>{1, 1};
  EXPECT_THROW(r.validate(), DataError);
  r.gt_beat_times = std::vector<std::size_t>{5};
  EXPECT_THROW(r.validate(), DataError);
  r.gt_beat_times = std::vector<std::size_t>{1};
  EXPECT_NO_THROW(r.validate());
  r.sample_rate_hz = 0.0;
  EXPECT_THROW(r.validate(), ParameterError);
}

}  // namespace
}  // namespace bcgmil
