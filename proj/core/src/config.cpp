#include "bcgmil/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "bcgmil/errors.hpp"

namespace bcgmil {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& text) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw FormatError("config key '" + key + "': not a number: '" + text + "'");
  }
  return v;
}

template <typename Int>
Int parse_integer(const std::string& key, const std::string& text) {
  Int v = 0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw FormatError("config key '" + key + "': not an integer: '" + text + "'");
  }
  return v;
}

std::string join(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out += ',';
    out += format_double(values[i]);
  }
  return out;
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

Config Config::parse(std::istream& in) {
  Config config;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    // '#' starts a comment anywhere on the line.
    const std::string body = trim(line.substr(0, line.find('#')));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw FormatError("config line " + std::to_string(number) + ": missing '='");
    }
    const std::string key = trim(body.substr(0, eq));
    if (key.empty()) {
      throw FormatError("config line " + std::to_string(number) + ": empty key");
    }
    if (config.has(key)) {
      throw FormatError("config line " + std::to_string(number) + ": repeated key '" +
                        key + "'");
    }
    config.values_[key] = trim(body.substr(eq + 1));
  }
  return config;
}

Config Config::parse_string(const std::string& text) {
  std::istringstream in(text);
  return parse(in);
}

Config Config::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open config file '" + path + "'");
  return parse(in);
}

void Config::set(const std::string& key, const std::string& value) {
  values_[key] = value;
}

std::optional<std::string> Config::get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  used_.insert(key);
  return it->second;
}

double Config::get_double(const std::string& key, double fallback) const {
  const auto v = get(key);
  return v ? parse_double(key, *v) : fallback;
}

std::optional<double> Config::get_optional_double(const std::string& key) const {
  const auto v = get(key);
  if (!v || v->empty()) return std::nullopt;
  return parse_double(key, *v);
}

int Config::get_int(const std::string& key, int fallback) const {
  const auto v = get(key);
  return v ? parse_integer<int>(key, *v) : fallback;
}

std::uint64_t Config::get_u64(const std::string& key, std::uint64_t fallback) const {
  const auto v = get(key);
  return v ? parse_integer<std::uint64_t>(key, *v) : fallback;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  const auto v = get(key);
  if (!v) return fallback;
  if (*v == "1" || *v == "true" || *v == "yes" || *v == "on") return true;
  if (*v == "0" || *v == "false" || *v == "no" || *v == "off") return false;
  throw FormatError("config key '" + key + "': not a boolean: '" + *v + "'");
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  const auto v = get(key);
  return v ? *v : fallback;
}

std::vector<double> Config::get_doubles(const std::string& key,
                                        const std::vector<double>& fallback) const {
  const auto v = get(key);
  if (!v) return fallback;
  std::vector<double> out;
  std::stringstream ss(*v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(key, trim(item)));
  return out;
}

std::vector<std::string> Config::unused_keys() const {
  std::vector<std::string> out;
  for (const auto& [key, value] : values_) {
    if (!used_.count(key)) out.push_back(key);
  }
  return out;
}

const std::vector<std::string>& fumi_param_keys() {
  static const std::vector<std::string> keys{
      "num_target", "num_background", "lambda",  "gamma_scale",
      "beta",       "psi",            "inner_iters", "max_em_iters",
      "tol",        "warmup_iters",   "stale_reseed_after"};
  return keys;
}

void read_fumi_params(const Config& c, FumiParams& p) {
  p.num_target = c.get_int("num_target", p.num_target);
  p.num_background = c.get_int("num_background", p.num_background);
  p.lambda = c.get_double("lambda", p.lambda);
  p.gamma_scale = c.get_double("gamma_scale", p.gamma_scale);
  p.beta = c.get_double("beta", p.beta);
  if (c.has("psi")) p.psi = c.get_optional_double("psi");
  p.inner_iters = c.get_int("inner_iters", p.inner_iters);
  p.max_em_iters = c.get_int("max_em_iters", p.max_em_iters);
  p.tol = c.get_double("tol", p.tol);
  p.warmup_iters = c.get_int("warmup_iters", p.warmup_iters);
  p.stale_reseed_after = c.get_int("stale_reseed_after", p.stale_reseed_after);
}

void read_detection_params(const Config& c, DetectionParams& p) {
  p.neighborhood = c.get_int("neighborhood", p.neighborhood);
  p.threshold = c.get_double("threshold", p.threshold);
  p.min_votes = c.get_int("min_votes", p.min_votes);
  p.refractory = c.get_int("refractory", p.refractory);
}

void read_coding_params(const Config& c, CodingParams& p) {
  p.lambda = c.get_double("detector_lambda", p.lambda);
  p.iterations = c.get_int("detector_iterations", p.iterations);
}

void read_feature_options(const Config& c, FeatureOptions& o) {
  o.low_hz = c.get_double("band_low_hz", o.low_hz);
  o.high_hz = c.get_double("band_high_hz", o.high_hz);
  o.filter_order = c.get_int("filter_order", o.filter_order);
  o.min_separation = static_cast<std::size_t>(
      c.get_int("min_separation", static_cast<int>(o.min_separation)));
  o.half_len =
      static_cast<std::size_t>(c.get_int("half_len", static_cast<int>(o.half_len)));
  o.zscore = c.get_bool("zscore", o.zscore);
}

void read_window_grid(const Config& c, WindowGrid& g) {
  g.window_s = c.get_double("window_s", g.window_s);
  g.step_s = c.get_double("step_s", g.step_s);
}

void read_dft_options(const Config& c, DftOptions& o) {
  o.band_low_hz = c.get_double("dft_low_hz", o.band_low_hz);
  o.band_high_hz = c.get_double("dft_high_hz", o.band_high_hz);
}

void read_baseline_options(const Config& c, BaselineOptions& o) {
  o.wppd_window_s = c.get_double("wppd_window_s", o.wppd_window_s);
  o.smoothing_hz = c.get_double("wppd_smoothing_hz", o.smoothing_hz);
  o.smoothing_order = c.get_int("wppd_smoothing_order", o.smoothing_order);
  o.energy_window_s = c.get_double("energy_window_s", o.energy_window_s);
  o.min_separation_s = c.get_double("baseline_min_separation_s", o.min_separation_s);
  o.relative_floor = c.get_double("baseline_relative_floor", o.relative_floor);
  o.prominence_threshold =
      c.get_double("baseline_prominence_threshold", o.prominence_threshold);
  read_window_grid(c, o.grid);
}

void read_synth_config(const Config& c, SynthConfig& s) {
  s.duration_s = c.get_double("duration_s", s.duration_s);
  s.fs = c.get_double("fs", s.fs);
  s.profile.mean_bpm = c.get_double("hr_mean_bpm", s.profile.mean_bpm);
  s.profile.amplitude_bpm = c.get_double("hr_amplitude_bpm", s.profile.amplitude_bpm);
  s.profile.period_s = c.get_double("hr_period_s", s.profile.period_s);
  s.shape.carrier_hz = c.get_double("template_carrier_hz", s.shape.carrier_hz);
  s.shape.width_s = c.get_double("template_width_s", s.shape.width_s);
  s.shape.length = c.get_int("template_length", s.shape.length);

  const auto gains = c.get_doubles("gains", {s.gains.begin(), s.gains.end()});
  const auto delays = c.get_doubles("delays", {s.delays.begin(), s.delays.end()});
  if (gains.size() != 4 || delays.size() != 4) {
    throw FormatError("gains and delays need exactly four values");
  }
  for (std::size_t i = 0; i < 4; ++i) {
    s.gains[i] = gains[i];
    if (delays[i] != std::round(delays[i])) throw FormatError("delays must be integers");
    s.delays[i] = static_cast<int>(delays[i]);
  }
  s.jitter_sd = c.get_double("jitter_sd", s.jitter_sd);
  s.respiration_amplitude = c.get_double("respiration_amplitude", s.respiration_amplitude);
  s.respiration_hz = c.get_double("respiration_hz", s.respiration_hz);
  s.noise_sd = c.get_double("noise_sd", s.noise_sd);
  if (c.has("snr_db")) s.snr_db = c.get_optional_double("snr_db");
  s.first_beat_s = c.get_double("first_beat_s", s.first_beat_s);
  s.seed = c.get_u64("seed", s.seed);
}

std::string synth_config_text(const SynthConfig& s) {
  std::ostringstream out;
  out << "duration_s=" << format_double(s.duration_s) << '\n'
      << "fs=" << format_double(s.fs) << '\n'
      << "hr_mean_bpm=" << format_double(s.profile.mean_bpm) << '\n'
      << "hr_amplitude_bpm=" << format_double(s.profile.amplitude_bpm) << '\n'
      << "hr_period_s=" << format_double(s.profile.period_s) << '\n'
      << "template_carrier_hz=" << format_double(s.shape.carrier_hz) << '\n'
      << "template_width_s=" << format_double(s.shape.width_s) << '\n'
      << "template_length=" << s.shape.length << '\n'
      << "gains=" << join({s.gains.begin(), s.gains.end()}) << '\n'
      << "delays=" << join({s.delays.begin(), s.delays.end()}) << '\n'
      << "jitter_sd=" << format_double(s.jitter_sd) << '\n'
      << "respiration_amplitude=" << format_double(s.respiration_amplitude) << '\n'
      << "respiration_hz=" << format_double(s.respiration_hz) << '\n'
      << "noise_sd=" << format_double(s.noise_sd) << '\n'
      << "snr_db=" << (s.snr_db ? format_double(*s.snr_db) : std::string()) << '\n'
      << "first_beat_s=" << format_double(s.first_beat_s) << '\n'
      << "seed=" << s.seed << '\n';
  return out.str();
}

}  // namespace bcgmil
