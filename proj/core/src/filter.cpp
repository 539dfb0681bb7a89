#include "bcgmil/filter.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "bcgmil/errors.hpp"

namespace bcgmil {
namespace {

using Complex = std::complex<double>;

struct Zpk {
  std::vector<Complex> zeros;
  std::vector<Complex> poles;
  double gain = 1.0;
};

// Normalized frequency at which a unit Butterworth prototype of order n has
// squared magnitude 1/sqrt(2), i.e. -1.5 dB. Two passes then give -3 dB.
double zero_phase_cutoff_scale(int n) {
  return std::pow(std::numbers::sqrt2 - 1.0, 1.0 / (2.0 * n));
}

std::vector<Complex> butterworth_prototype_poles(int n) {
  std::vector<Complex> poles;
  poles.reserve(n);
  for (int k = 1; k <= n; ++k) {
    const double theta = std::numbers::pi * (2.0 * k + n - 1) / (2.0 * n);
    poles.push_back(std::polar(1.0, theta));
  }
  return poles;
}

double prewarp(double f_hz, double fs) {
  return 2.0 * fs * std::tan(std::numbers::pi * f_hz / fs);
}

// Bilinear transform of an analog zpk. Zeros at infinity land on z = -1.
Zpk bilinear(const Zpk& analog, double fs) {
  const double fs2 = 2.0 * fs;
  Zpk digital;
  Complex num{1.0, 0.0};
  Complex den{1.0, 0.0};
  for (const Complex& z : analog.zeros) {
    digital.zeros.push_back((fs2 + z) / (fs2 - z));
    num *= (fs2 - z);
  }
  for (const Complex& p : analog.poles) {
    digital.poles.push_back((fs2 + p) / (fs2 - p));
    den *= (fs2 - p);
  }
  const std::size_t at_infinity = analog.poles.size() - analog.zeros.size();
  for (std::size_t i = 0; i < at_infinity; ++i) {
    digital.zeros.emplace_back(-1.0, 0.0);
  }
  digital.gain = analog.gain * (num / den).real();
  return digital;
}

// Groups conjugate pole pairs (and leftover real poles) into biquads. All
// zeros produced by the designs here are real (+1 or -1).
SosFilter to_sos(const Zpk& zpk) {
  std::vector<std::array<Complex, 2>> pole_pairs;
  std::vector<double> real_poles;
  constexpr double kImagTol = 1e-12;
  for (const Complex& p : zpk.poles) {
    if (std::abs(p.imag()) <= kImagTol) {
      real_poles.push_back(p.real());
    } else if (p.imag() > 0.0) {
      pole_pairs.push_back({p, std::conj(p)});
    }
  }
  std::sort(real_poles.begin(), real_poles.end());
  for (std::size_t i = 0; i + 1 < real_poles.size(); i += 2) {
    pole_pairs.push_back({Complex{real_poles[i], 0.0},
                          Complex{real_poles[i + 1], 0.0}});
  }
  const bool odd_real = real_poles.size() % 2 == 1;

  std::vector<double> zeros;
  zeros.reserve(zpk.zeros.size());
  for (const Complex& z : zpk.zeros) zeros.push_back(z.real());

  SosFilter sos;
  std::size_t next_zero = 0;
  for (const auto& pair : pole_pairs) {
    Biquad s;
    s.a = {1.0, -(pair[0] + pair[1]).real(), (pair[0] * pair[1]).real()};
    if (next_zero + 2 <= zeros.size()) {
      const double z0 = zeros[next_zero];
      const double z1 = zeros[next_zero + 1];
      s.b = {1.0, -(z0 + z1), z0 * z1};
      next_zero += 2;
    } else if (next_zero < zeros.size()) {
      s.b = {1.0, -zeros[next_zero], 0.0};
      next_zero += 1;
    }
    sos.push_back(s);
  }
  if (odd_real) {
    Biquad s;
    s.a = {1.0, -real_poles.back(), 0.0};
    if (next_zero < zeros.size()) {
      s.b = {1.0, -zeros[next_zero], 0.0};
      ++next_zero;
    }
    sos.push_back(s);
  }
  if (!sos.empty()) {
    for (double& c : sos.front().b) c *= zpk.gain;
  }
  return sos;
}

void check_rate(double fs) {
  if (!(fs > 0.0) || !std::isfinite(fs)) {
    throw ParameterError("sample rate must be positive");
  }
}

// Steady-state transposed-DF2 state of each section for a unit step input.
std::vector<std::array<double, 2>> step_initial_state(const SosFilter& sos) {
  std::vector<std::array<double, 2>> zi(sos.size());
  double scale = 1.0;
  for (std::size_t s = 0; s < sos.size(); ++s) {
    const auto& b = sos[s].b;
    const auto& a = sos[s].a;
    const double asum = a[0] + a[1] + a[2];
    const double gain = (b[0] + b[1] + b[2]) / asum;
    const double z1 = b[2] - a[2] * gain;
    const double z0 = b[1] - a[1] * gain + z1;
    zi[s] = {scale * z0, scale * z1};
    scale *= gain;
  }
  return zi;
}

void run_sections(const SosFilter& sos, std::vector<double>& x,
                  std::vector<std::array<double, 2>> state) {
  for (std::size_t s = 0; s < sos.size(); ++s) {
    const auto& b = sos[s].b;
    const auto& a = sos[s].a;
    double z0 = state[s][0];
    double z1 = state[s][1];
    for (double& v : x) {
      const double in = v;
      const double out = b[0] * in + z0;
      z0 = b[1] * in - a[1] * out + z1;
      z1 = b[2] * in - a[2] * out;
      v = out;
    }
  }
}

}  // namespace

SosFilter butterworth_bandpass(double fs, double low_hz, double high_hz,
                               int order) {
  check_rate(fs);
  if (!(low_hz > 0.0) || !(high_hz > low_hz) || !(high_hz < fs / 2.0)) {
    throw ParameterError("band-pass requires 0 < low < high < fs/2");
  }
  if (order < 2 || order % 2 != 0) {
    throw ParameterError("band-pass order must be even and >= 2");
  }
  const int n = order / 2;
  const double wl = prewarp(low_hz, fs);
  const double wh = prewarp(high_hz, fs);
  const double w0 = std::sqrt(wl * wh);
  const double bw = (wh - wl) / zero_phase_cutoff_scale(n);

  Zpk analog;
  for (const Complex& p : butterworth_prototype_poles(n)) {
    const Complex half = p * (bw / 2.0);
    const Complex root = std::sqrt(half * half - w0 * w0);
    analog.poles.push_back(half + root);
    analog.poles.push_back(half - root);
  }
  analog.zeros.assign(n, Complex{0.0, 0.0});
  analog.gain = std::pow(bw, n);

  Zpk digital = bilinear(analog, fs);
  // Interleave the +1 and -1 zeros so every biquad gets (1 - z^-2).
  std::vector<Complex> interleaved;
  for (int i = 0; i < n; ++i) {
    interleaved.emplace_back(1.0, 0.0);
    interleaved.emplace_back(-1.0, 0.0);
  }
  digital.zeros = std::move(interleaved);
  return to_sos(digital);
}

SosFilter butterworth_lowpass(double fs, double cutoff_hz, int order) {
  check_rate(fs);
  if (!(cutoff_hz > 0.0) || !(cutoff_hz < fs / 2.0)) {
    throw ParameterError("low-pass requires 0 < cutoff < fs/2");
  }
  if (order < 1) throw ParameterError("low-pass order must be >= 1");
  const double wc = prewarp(cutoff_hz, fs) / zero_phase_cutoff_scale(order);
  Zpk analog;
  for (const Complex& p : butterworth_prototype_poles(order)) {
    analog.poles.push_back(p * wc);
  }
  analog.gain = std::pow(wc, order);
  return to_sos(bilinear(analog, fs));
}

std::complex<double> frequency_response(const SosFilter& sos, double f_hz,
                                        double fs) {
  const Complex z1 = std::polar(1.0, -2.0 * std::numbers::pi * f_hz / fs);
  const Complex z2 = z1 * z1;
  Complex h{1.0, 0.0};
  for (const Biquad& s : sos) {
    h *= (s.b[0] + s.b[1] * z1 + s.b[2] * z2) /
         (s.a[0] + s.a[1] * z1 + s.a[2] * z2);
  }
  return h;
}

std::vector<double> sosfilt(const SosFilter& sos, std::span<const double> x) {
  std::vector<double> y(x.begin(), x.end());
  run_sections(sos, y, std::vector<std::array<double, 2>>(sos.size()));
  return y;
}

std::vector<double> filtfilt(const SosFilter& sos, std::span<const double> x) {
  const std::size_t n = x.size();
  if (n == 0) return {};
  const std::size_t padlen =
      std::min<std::size_t>(n - 1, 3 * (2 * sos.size() + 1));

  std::vector<double> ext;
  ext.reserve(n + 2 * padlen);
  for (std::size_t i = padlen; i >= 1; --i) ext.push_back(2.0 * x[0] - x[i]);
  ext.insert(ext.end(), x.begin(), x.end());
  for (std::size_t i = 1; i <= padlen; ++i) {
    ext.push_back(2.0 * x[n - 1] - x[n - 1 - i]);
  }

  const auto zi = step_initial_state(sos);
  auto scaled = [&zi](double x0) {
    auto state = zi;
    for (auto& s : state) {
      s[0] *= x0;
      s[1] *= x0;
    }
    return state;
  };

  run_sections(sos, ext, scaled(ext.front()));
  std::reverse(ext.begin(), ext.end());
  run_sections(sos, ext, scaled(ext.front()));
  std::reverse(ext.begin(), ext.end());

  return std::vector<double>(ext.begin() + static_cast<std::ptrdiff_t>(padlen),
                             ext.begin() + static_cast<std::ptrdiff_t>(padlen + n));
}

std::vector<double> bandpass_filter(std::span<const double> signal, double fs,
                                    double low_hz, double high_hz, int order) {
  return filtfilt(butterworth_bandpass(fs, low_hz, high_hz, order), signal);
}

std::vector<double> lowpass_filter(std::span<const double> signal, double fs,
                                   double cutoff_hz, int order) {
  return filtfilt(butterworth_lowpass(fs, cutoff_hz, order), signal);
}

}  // namespace bcgmil
