#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "bcgmil/errors.hpp"
#include "bcgmil/heart_rate.hpp"
#include "bcgmil/synth.hpp"
#include "support/fixtures.hpp"
#include "support/pipeline.hpp"

namespace bcgmil {
namespace {

std::vector<std::size_t> periodic_beats(double period_s, double fs, double duration_s) {
  std::vector<std::size_t> out;
  for (double t = 0.5; t < duration_s; t += period_s) {
    out.push_back(static_cast<std::size_t>(std::llround(t * fs)));
  }
  return out;
}

// Composite Simpson rule over the analytic HR profile.
double simpson_mean(const HrProfile& p, double t0, double t1) {
  const int n = 2000;
  const double h = (t1 - t0) / n;
  double s = p.bpm_at(t0) + p.bpm_at(t1);
  for (int i = 1; i < n; ++i) s += (i % 2 == 1 ? 4.0 : 2.0) * p.bpm_at(t0 + i * h);
  return s * h / 3.0 / (t1 - t0);
}

TEST(WindowGrid, WholeWindowsOnly) {
  const WindowGrid g;
  EXPECT_EQ(g.starts(300.0), (std::vector<double>{0, 15, 30, 45, 60, 75, 90, 105, 120, 135,
                                                  150, 165, 180, 195, 210, 225, 240}));
  EXPECT_TRUE(g.starts(59.0).empty());
  EXPECT_EQ(g.starts(60.0).size(), 1u);
  EXPECT_THROW(WindowGrid({0.0, 15.0}).starts(100.0), ParameterError);
}

TEST(HrFromBeats, OneSecondBeats) {
  const auto hr = hr_from_beats(periodic_beats(1.0, 100.0, 300.0), 100.0, 300.0);
  ASSERT_EQ(hr.size(), 17u);
  for (const auto& s : hr.samples) {
    ASSERT_TRUE(s.bpm.has_value());
    EXPECT_DOUBLE_EQ(*s.bpm, 60.0);
  }
  EXPECT_DOUBLE_EQ(hr.samples.front().time_s, 30.0);
}

TEST(HrFromBeats, ThreeQuarterSecondBeats) {
  const auto hr = hr_from_beats(periodic_beats(0.75, 100.0, 300.0), 100.0, 300.0);
  for (const auto& s : hr.samples) EXPECT_DOUBLE_EQ(*s.bpm, 80.0);
}

TEST(HrFromBeats, ExactForAnyIntegerPeriod) {
  for (std::size_t period : {37u, 50u, 64u, 113u}) {
    std::vector<std::size_t> beats;
    for (std::size_t i = 7; i < 30000; i += period) beats.push_back(i);
    const auto hr = hr_from_beats(beats, 100.0, 300.0);
    for (const auto& s : hr.samples) {
      // 6000 / period is the correctly rounded value of 60 / (period / fs).
      EXPECT_EQ(*s.bpm, 6000.0 / static_cast<double>(period));
    }
  }
}

TEST(HrFromBeats, GapsWithoutIntervals) {
  const std::vector<std::size_t> beats{100, 200};
  const auto hr = hr_from_beats(beats, 100.0, 300.0);
  EXPECT_TRUE(hr.samples[0].bpm.has_value());
  EXPECT_FALSE(hr.samples.back().bpm.has_value());
  EXPECT_EQ(hr_from_beats({}, 100.0, 300.0).gap_count(), 17u);
}

TEST(HrFromBeats, FollowsVariableProfile) {
  const SynthConfig cfg = fixtures::clean_config(70.0);
  HrProfile p = cfg.profile;
  p.amplitude_bpm = 5.0;
  p.period_s = 60.0;
  std::vector<std::size_t> beats;
  for (double t : beat_times(p, 0.5, 300.0)) {
    beats.push_back(static_cast<std::size_t>(std::llround(t * 100.0)));
  }
  const auto hr = hr_from_beats(beats, 100.0, 300.0);
  const auto starts = WindowGrid{}.starts(300.0);
  ASSERT_EQ(hr.size(), starts.size());
  for (std::size_t i = 0; i < starts.size(); ++i) {
    EXPECT_NEAR(*hr.samples[i].bpm, simpson_mean(p, starts[i], starts[i] + 60.0), 0.5);
  }
}

ConfidenceSeries sampled(double f_hz, double fs, double seconds, std::size_t channels = 1) {
  ConfidenceSeries s;
  s.channels.resize(channels);
  const auto n = static_cast<std::size_t>(seconds * fs);
  for (auto& ch : s.channels) {
    for (std::size_t i = 0; i < n; ++i) {
      ch.push_back({i, 2.0 + std::sin(2.0 * std::numbers::pi * f_hz * static_cast<double>(i) / fs)});
    }
  }
  return s;
}

TEST(HrFromDft, PureSpectralLine) {
  const auto hr = hr_from_confidence_dft(sampled(1.2, 100.0, 300.0), 100.0, 300.0);
  ASSERT_EQ(hr.size(), 17u);
  for (const auto& s : hr.samples) EXPECT_NEAR(*s.bpm, 72.0, 1.0);
}

TEST(HrFromDft, ConstantConfidenceIsGap) {
  ConfidenceSeries s;
  s.channels.resize(2);
  for (std::size_t i = 0; i < 30000; ++i) {
    s.channels[0].push_back({i, 1.7});
    s.channels[1].push_back({i, 1.7});
  }
  EXPECT_EQ(hr_from_confidence_dft(s, 100.0, 300.0).gap_count(), 17u);
}

TEST(HrFromDft, EmptySeriesIsGap) {
  ConfidenceSeries s;
  s.channels.resize(4);
  EXPECT_EQ(hr_from_confidence_dft(s, 100.0, 300.0).gap_count(), 17u);
}

TEST(HrFromDft, BandLimits) {
  // 0.5 Hz lies below the search band, 2.5 Hz inside it.
  ConfidenceSeries s = sampled(0.5, 100.0, 120.0);
  for (std::size_t i = 0; i < s.channels[0].size(); ++i) {
    s.channels[0][i].confidence +=
        0.2 * std::sin(2.0 * std::numbers::pi * 2.5 * static_cast<double>(i) / 100.0);
  }
  const auto hr = hr_from_confidence_dft(s, 100.0, 120.0);
  for (const auto& x : hr.samples) EXPECT_NEAR(*x.bpm, 150.0, 1.0);
  EXPECT_THROW(hr_from_confidence_dft(s, 100.0, 120.0, {}, {3.0, 1.0}), ParameterError);
}

TEST(HrFromDft, SyntheticRecordingAtSeventyTwo) {
  const auto model = pipeline::train(generate(fixtures::training_config(11)).recording);
  const SynthOutput s = generate(fixtures::constant_config(72.0, 14));
  const auto series = confidence_series(s.recording, model.detector());
  const auto hr = hr_from_confidence_dft(series, 100.0, s.recording.duration_s());
  ASSERT_EQ(hr.size(), 17u);
  for (const auto& x : hr.samples) {
    ASSERT_TRUE(x.bpm.has_value());
    EXPECT_NEAR(*x.bpm, 72.0, 1.0);
  }
}

}  // namespace
}  // namespace bcgmil
