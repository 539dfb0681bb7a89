#ifndef BCGMIL_CONFIG_HPP_
#define BCGMIL_CONFIG_HPP_

// Flat key=value configuration. Blank lines and lines starting with '#' are
// ignored; whitespace around keys and values is trimmed. Every lookup marks
// its key as used so that callers can reject typos afterwards.

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "bcgmil/baselines.hpp"
#include "bcgmil/detector.hpp"
#include "bcgmil/fumi.hpp"
#include "bcgmil/heart_rate.hpp"
#include "bcgmil/signal.hpp"
#include "bcgmil/synth.hpp"

namespace bcgmil {

class Config {
 public:
  // One key = value per line, '#' comments. FormatError on a line without
  // '=', an empty key or a repeated key.
  static Config parse(std::istream& in);
  static Config parse_string(const std::string& text);
  // FormatError also when the file cannot be opened.
  static Config load(const std::string& path);

  // Later values win; used for command-line overrides.
  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const { return values_.count(key) != 0; }

  std::optional<std::string> get(const std::string& key) const;
  // Typed getters return `fallback` when absent and throw FormatError on a
  // malformed value.
  double get_double(const std::string& key, double fallback) const;
  std::optional<double> get_optional_double(const std::string& key) const;
  int get_int(const std::string& key, int fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  std::vector<double> get_doubles(const std::string& key,
                                  const std::vector<double>& fallback) const;

  std::vector<std::string> unused_keys() const;
  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
  mutable std::set<std::string> used_;
};

// Each reader fills the fields whose keys are present and leaves the rest.
void read_fumi_params(const Config& config, FumiParams& params);
void read_detection_params(const Config& config, DetectionParams& params);
void read_coding_params(const Config& config, CodingParams& params);
void read_feature_options(const Config& config, FeatureOptions& options);
void read_window_grid(const Config& config, WindowGrid& grid);
void read_dft_options(const Config& config, DftOptions& options);
void read_baseline_options(const Config& config, BaselineOptions& options);
void read_synth_config(const Config& config, SynthConfig& synth);

// key=value text for a synth config, in a fixed key order.
std::string synth_config_text(const SynthConfig& synth);

// Names of the FumiParams keys, for command-line overrides.
const std::vector<std::string>& fumi_param_keys();

// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

}  // namespace bcgmil

#endif  // BCGMIL_CONFIG_HPP_
