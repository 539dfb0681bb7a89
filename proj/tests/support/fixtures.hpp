#ifndef BCGMIL_TESTS_FIXTURES_HPP_
#define BCGMIL_TESTS_FIXTURES_HPP_

// Synthetic recordings shared by the unit and acceptance tests.

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>

#include "bcgmil/synth.hpp"

namespace bcgmil::fixtures {

// Training recording: 5 minutes at 60 bpm, SNR 10 dB, default channel
// delays {0, 3, 6, 9}, jitter sd 2 samples.
inline SynthConfig training_config(std::uint64_t seed = 11) {
  SynthConfig c;
  c.duration_s = 300.0;
  c.profile.mean_bpm = 60.0;
  c.snr_db = 10.0;
  c.jitter_sd = 2.0;
  c.seed = seed;
  return c;
}

// Held-out recording with sinusoidal variability, 70 +- 5 bpm.
inline SynthConfig hrv_test_config(std::uint64_t seed = 12) {
  SynthConfig c = training_config(seed);
  c.profile.mean_bpm = 70.0;
  c.profile.amplitude_bpm = 5.0;
  c.profile.period_s = 60.0;
  return c;
}

inline SynthConfig constant_config(double bpm, std::uint64_t seed) {
  SynthConfig c = training_config(seed);
  c.profile.mean_bpm = bpm;
  return c;
}

// Noise-free periodic recording.
inline SynthConfig clean_config(double bpm, double duration_s = 300.0) {
  SynthConfig c;
  c.duration_s = duration_s;
  c.profile.mean_bpm = bpm;
  return c;
}

// A fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("bcgmil-" + tag + "-" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string file(const std::string& name) const { return (path_ / name).string(); }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace bcgmil::fixtures

#endif  // BCGMIL_TESTS_FIXTURES_HPP_
