#ifndef BCGMIL_SYNTH_HPP_
#define BCGMIL_SYNTH_HPP_

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "bcgmil/signal.hpp"

namespace bcgmil {

// HR(t) = mean_bpm + amplitude_bpm * sin(2 pi t / period_s). A zero
// amplitude gives a constant rate.
struct HrProfile {
  double mean_bpm = 60.0;
  double amplitude_bpm = 0.0;
  double period_s = 60.0;

  double bpm_at(double t_s) const;
  // Beats elapsed since t = 0: the integral of HR(t) / 60.
  double phase(double t_s) const;
  // Time average of HR(t) over [t0, t1].
  double mean_bpm_between(double t0_s, double t1_s) const;
  void validate() const;
};

// Gaussian-windowed carrier, centered, scaled to unit norm.
struct TemplateShape {
  double carrier_hz = 7.0;
  double width_s = 0.12;  // Gaussian standard deviation
  int length = 91;
};

Eigen::VectorXd make_template(const TemplateShape& shape, double fs);

struct SynthConfig {
  double duration_s = 300.0;
  double fs = 100.0;
  HrProfile profile;
  TemplateShape shape;
  std::array<double, 4> gains{1.0, 0.8, 0.6, 0.9};
  std::array<int, 4> delays{0, 3, 6, 9};
  double jitter_sd = 0.0;  // samples, shared by all channels of a beat
  double respiration_amplitude = 0.0;
  double respiration_hz = 0.25;
  double noise_sd = 0.0;
  // When set, overrides noise_sd so that heartbeat power / noise power
  // matches this ratio in dB.
  std::optional<double> snr_db;
  double first_beat_s = 0.5;
  std::uint64_t seed = 1;

  void validate() const;
};

struct SynthOutput {
  Recording recording;  // gt_beat_times filled
  Eigen::VectorXd planted_template;
  std::vector<double> beat_times_s;  // before jitter and rounding
  double noise_sd = 0.0;             // the value actually used
};

// Bit-identical for equal configs.
SynthOutput generate(const SynthConfig& config);

// Beat instants t_k with phase(t_k) - phase(first) = k, inside the duration.
std::vector<double> beat_times(const HrProfile& profile, double first_beat_s,
                               double duration_s);

}  // namespace bcgmil

#endif  // BCGMIL_SYNTH_HPP_
