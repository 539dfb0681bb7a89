#include "bcgmil/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "bcgmil/errors.hpp"

namespace bcgmil {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}  // namespace

double HrProfile::bpm_at(double t_s) const {
  return mean_bpm + amplitude_bpm * std::sin(kTwoPi * t_s / period_s);
}

double HrProfile::phase(double t_s) const {
  const double swing =
      amplitude_bpm * period_s / kTwoPi * (1.0 - std::cos(kTwoPi * t_s / period_s));
  return (mean_bpm * t_s + swing) / 60.0;
}

double HrProfile::mean_bpm_between(double t0_s, double t1_s) const {
  if (!(t1_s > t0_s)) throw ParameterError("empty averaging interval");
  return 60.0 * (phase(t1_s) - phase(t0_s)) / (t1_s - t0_s);
}

void HrProfile::validate() const {
  if (!(mean_bpm > 0.0)) throw ParameterError("mean heart rate must be positive");
  if (!(amplitude_bpm >= 0.0) || !(amplitude_bpm < mean_bpm)) {
    throw ParameterError("HRV amplitude must be in [0, mean)");
  }
  if (!(period_s > 0.0)) throw ParameterError("HRV period must be positive");
}

Eigen::VectorXd make_template(const TemplateShape& shape, double fs) {
  if (shape.length < 1) throw ParameterError("template length must be >= 1");
  if (!(shape.width_s > 0.0)) throw ParameterError("template width must be positive");
  if (!(fs > 0.0)) throw ParameterError("sample rate must be positive");
  Eigen::VectorXd w(shape.length);
  const int center = shape.length / 2;
  for (int i = 0; i < shape.length; ++i) {
    const double t = (i - center) / fs;
    w[i] = std::exp(-0.5 * t * t / (shape.width_s * shape.width_s)) *
           std::cos(kTwoPi * shape.carrier_hz * t);
  }
  const double norm = w.norm();
  if (norm == 0.0) throw ParameterError("template is identically zero");
  return w / norm;
}

void SynthConfig::validate() const {
  if (!(fs > 0.0)) throw ParameterError("fs must be positive");
  if (!(duration_s > 0.0)) throw ParameterError("duration must be positive");
  profile.validate();
  if (shape.length != 91) throw ParameterError("template length must be 91");
  for (double g : gains) {
    if (!(g >= 0.0)) throw ParameterError("channel gains must be >= 0");
  }
  if (!(jitter_sd >= 0.0)) throw ParameterError("jitter sd must be >= 0");
  if (!(noise_sd >= 0.0)) throw ParameterError("noise sd must be >= 0");
  if (!(first_beat_s >= 0.0)) throw ParameterError("first beat time must be >= 0");
}

std::vector<double> beat_times(const HrProfile& profile, double first_beat_s,
                               double duration_s) {
  profile.validate();
  std::vector<double> times;
  const double slowest = 60.0 / (profile.mean_bpm - profile.amplitude_bpm);
  const double base = profile.phase(first_beat_s);
  double t = first_beat_s;
  for (int k = 1; t < duration_s; ++k) {
    times.push_back(t);
    // phase is strictly increasing, so bisection on one slow interval is safe.
    double lo = t;
    double hi = t + slowest + 1e-9;
    for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (profile.phase(mid) - base < k) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    t = 0.5 * (lo + hi);
  }
  return times;
}

SynthOutput generate(const SynthConfig& config) {
  config.validate();
  SynthOutput out;
  const auto n = static_cast<std::size_t>(std::llround(config.duration_s * config.fs));
  const int half = config.shape.length / 2;
  out.planted_template = make_template(config.shape, config.fs);
  out.beat_times_s = beat_times(config.profile, config.first_beat_s, config.duration_s);

  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  std::vector<std::size_t> gt;
  std::vector<long> centers;
  for (double t : out.beat_times_s) {
    long jitter = 0;
    if (config.jitter_sd > 0.0) jitter = std::lround(config.jitter_sd * gauss(rng));
    const long c = std::lround(t * config.fs) + jitter;
    centers.push_back(c);
    if (c >= 0 && static_cast<std::size_t>(c) < n) gt.push_back(static_cast<std::size_t>(c));
  }

  Recording& rec = out.recording;
  rec.sample_rate_hz = config.fs;
  rec.channels.assign(4, std::vector<double>(n, 0.0));
  double beat_power = 0.0;
  for (std::size_t ch = 0; ch < 4; ++ch) {
    auto& x = rec.channels[ch];
    for (long c : centers) {
      const long start = c + config.delays[ch] - half;
      for (int i = 0; i < config.shape.length; ++i) {
        const long idx = start + i;
        if (idx < 0 || idx >= static_cast<long>(n)) continue;
        x[static_cast<std::size_t>(idx)] += config.gains[ch] * out.planted_template[i];
      }
    }
    for (double v : x) beat_power += v * v;
  }
  beat_power /= static_cast<double>(4 * n);

  out.noise_sd = config.noise_sd;
  if (config.snr_db) {
    out.noise_sd = std::sqrt(beat_power / std::pow(10.0, *config.snr_db / 10.0));
  }
  for (auto& x : rec.channels) {
    for (std::size_t i = 0; i < n; ++i) {
      const double t = static_cast<double>(i) / config.fs;
      x[i] += config.respiration_amplitude * std::sin(kTwoPi * config.respiration_hz * t);
      if (out.noise_sd > 0.0) x[i] += out.noise_sd * gauss(rng);
    }
  }
  // Large jitter could swap neighbours; the reference list stays sorted.
  std::sort(gt.begin(), gt.end());
  gt.erase(std::unique(gt.begin(), gt.end()), gt.end());
  rec.gt_beat_times = std::move(gt);
  return out;
}

}  // namespace bcgmil
