#ifndef BCGMIL_FILTER_HPP_
#define BCGMIL_FILTER_HPP_

#include <array>
#include <complex>
#include <span>
#include <vector>

namespace bcgmil {

// One second-order section, a[0] == 1.
struct Biquad {
  std::array<double, 3> b{1.0, 0.0, 0.0};
  std::array<double, 3> a{1.0, 0.0, 0.0};
};

using SosFilter = std::vector<Biquad>;

// Butterworth designs intended for forward-backward (zero-phase) use: the
// single-pass prototype is widened so that the combined forward-backward
// response sits at -3 dB exactly at the requested cutoffs.
//
// `order` is the band-pass order (twice the low-pass prototype order) and
// must be even.
SosFilter butterworth_bandpass(double fs, double low_hz, double high_hz,
                               int order);
SosFilter butterworth_lowpass(double fs, double cutoff_hz, int order);

// Single-pass complex response at frequency f.
std::complex<double> frequency_response(const SosFilter& sos, double f_hz,
                                        double fs);

// Causal filtering with transposed direct form II, starting from zero state.
std::vector<double> sosfilt(const SosFilter& sos, std::span<const double> x);

// Zero-phase filtering: odd extension at both ends, steady-state initial
// conditions, forward pass then backward pass. Output length equals input
// length.
std::vector<double> filtfilt(const SosFilter& sos, std::span<const double> x);

// Convenience wrappers used throughout the pipeline.
std::vector<double> bandpass_filter(std::span<const double> signal, double fs,
                                    double low_hz, double high_hz,
                                    int order = 6);
std::vector<double> lowpass_filter(std::span<const double> signal, double fs,
                                   double cutoff_hz, int order = 2);

}  // namespace bcgmil

#endif  // BCGMIL_FILTER_HPP_
