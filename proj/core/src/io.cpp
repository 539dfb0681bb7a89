#include "bcgmil/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "bcgmil/config.hpp"
#include "bcgmil/errors.hpp"

namespace bcgmil {

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  // getline drops a trailing empty field.
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

double to_double(const std::string& text, const std::string& what) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (text.empty() || ec != std::errc() || ptr != end || !std::isfinite(v)) {
    throw FormatError(what + ": bad number '" + text + "'");
  }
  return v;
}

std::size_t to_index(const std::string& text, const std::string& what) {
  std::size_t v = 0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (text.empty() || ec != std::errc() || ptr != end) {
    throw FormatError(what + ": bad index '" + text + "'");
  }
  return v;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open '" + path + "'");
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write '" + path + "'");
  return out;
}

void finish(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw FormatError("write failed for '" + path + "'");
}

std::string row(const Eigen::VectorXd& v) {
  std::string s;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i > 0) s += ',';
    s += format_double(v[i]);
  }
  return s;
}

}  // namespace

Recording parse_recording_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("recording: empty file");
  strip_cr(line);
  const auto header = split(line);
  if (header.size() < 2 || header[0] != "t") {
    throw FormatError("recording: header must start with 't,ch0'");
  }
  std::size_t num_channels = 0;
  bool has_gt = false;
  for (std::size_t i = 1; i < header.size(); ++i) {
    if (header[i] == "ch" + std::to_string(num_channels)) {
      if (has_gt) throw FormatError("recording: gt must be the last column");
      ++num_channels;
    } else if (header[i] == "gt" && !has_gt) {
      has_gt = true;
    } else {
      throw FormatError("recording: unexpected column '" + header[i] + "'");
    }
  }
  if (num_channels == 0) throw FormatError("recording: no channel columns");

  Recording rec;
  rec.channels.resize(num_channels);
  std::vector<double> times;
  std::vector<std::size_t> gt;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) continue;
    const auto fields = split(line);
    const std::string where = "recording line " + std::to_string(line_no);
    if (fields.size() != header.size()) {
      throw FormatError(where + ": expected " + std::to_string(header.size()) +
                        " fields, got " + std::to_string(fields.size()));
    }
    times.push_back(to_double(fields[0], where));
    for (std::size_t c = 0; c < num_channels; ++c) {
      rec.channels[c].push_back(to_double(fields[c + 1], where));
    }
    if (has_gt) {
      const double g = to_double(fields.back(), where);
      if (g != 0.0 && g != 1.0) throw FormatError(where + ": gt must be 0 or 1");
      if (g == 1.0) gt.push_back(times.size() - 1);
    }
  }
  if (times.size() < 2) throw FormatError("recording: need at least two samples");

  const double dt = (times.back() - times.front()) / static_cast<double>(times.size() - 1);
  if (!(dt > 0.0)) throw FormatError("recording: time column must increase");
  for (std::size_t i = 1; i < times.size(); ++i) {
    const double expected = times.front() + dt * static_cast<double>(i);
    if (!(times[i] > times[i - 1]) || std::abs(times[i] - expected) > 1e-3 * dt) {
      throw FormatError("recording: time column is not uniformly sampled");
    }
  }
  double fs = 1.0 / dt;
  if (std::abs(fs - std::round(fs)) < 1e-6 * fs) fs = std::round(fs);
  rec.sample_rate_hz = fs;
  if (has_gt) rec.gt_beat_times = std::move(gt);
  return rec;
}

Recording read_recording_csv(const std::string& path) {
  auto in = open_in(path);
  return parse_recording_csv(in);
}

void write_recording_csv(const std::string& path, const Recording& recording) {
  recording.validate();
  auto out = open_out(path);
  out << 't';
  for (std::size_t c = 0; c < recording.channels.size(); ++c) out << ",ch" << c;
  const bool has_gt = recording.gt_beat_times.has_value();
  if (has_gt) out << ",gt";
  out << '\n';
  std::size_t next_gt = 0;
  const std::size_t n = recording.num_samples();
  for (std::size_t i = 0; i < n; ++i) {
    out << format_double(static_cast<double>(i) / recording.sample_rate_hz);
    for (const auto& ch : recording.channels) out << ',' << format_double(ch[i]);
    if (has_gt) {
      const auto& gt = *recording.gt_beat_times;
      const bool beat = next_gt < gt.size() && gt[next_gt] == i;
      if (beat) ++next_gt;
      out << ',' << (beat ? '1' : '0');
    }
    out << '\n';
  }
  finish(out, path);
}

Dictionary read_dictionary_csv(const std::string& path) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw FormatError("dictionary: empty file");
  strip_cr(line);
  const auto header = split(line);
  if (header.size() < 2 || header[0] != "kind") {
    throw FormatError("dictionary: header must start with 'kind'");
  }
  const auto d = static_cast<Eigen::Index>(header.size() - 1);
  std::vector<Eigen::VectorXd> target;
  std::vector<Eigen::VectorXd> background;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) continue;
    const auto fields = split(line);
    const std::string where = "dictionary line " + std::to_string(line_no);
    if (fields.size() != header.size()) throw FormatError(where + ": wrong field count");
    Eigen::VectorXd atom(d);
    for (Eigen::Index i = 0; i < d; ++i) {
      atom[i] = to_double(fields[static_cast<std::size_t>(i) + 1], where);
    }
    if (fields[0] == "target") {
      target.push_back(atom);
    } else if (fields[0] == "background") {
      background.push_back(atom);
    } else {
      throw FormatError(where + ": kind must be target or background");
    }
  }
  if (target.empty() || background.empty()) {
    throw FormatError("dictionary: needs target and background atoms");
  }
  Dictionary dict;
  dict.target.resize(d, static_cast<Eigen::Index>(target.size()));
  dict.background.resize(d, static_cast<Eigen::Index>(background.size()));
  for (std::size_t i = 0; i < target.size(); ++i) {
    dict.target.col(static_cast<Eigen::Index>(i)) = target[i];
  }
  for (std::size_t i = 0; i < background.size(); ++i) {
    dict.background.col(static_cast<Eigen::Index>(i)) = background[i];
  }
  return dict;
}

void write_dictionary_csv(const std::string& path, const Dictionary& dict) {
  auto out = open_out(path);
  out << "kind";
  for (Eigen::Index i = 0; i < dict.dim(); ++i) out << ",s" << i;
  out << '\n';
  for (Eigen::Index t = 0; t < dict.num_target(); ++t) {
    out << "target," << row(dict.target.col(t)) << '\n';
  }
  for (Eigen::Index k = 0; k < dict.num_background(); ++k) {
    out << "background," << row(dict.background.col(k)) << '\n';
  }
  finish(out, path);
}

Eigen::MatrixXd read_matrix_csv(const std::string& path) {
  auto in = open_in(path);
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) continue;
    const auto fields = split(line);
    const std::string where = "matrix line " + std::to_string(line_no);
    if (!rows.empty() && fields.size() != rows.front().size()) {
      throw FormatError(where + ": ragged row");
    }
    std::vector<double> r;
    for (const auto& f : fields) r.push_back(to_double(f, where));
    rows.push_back(std::move(r));
  }
  if (rows.empty()) throw FormatError("matrix: empty file");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return m;
}

void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& m) {
  auto out = open_out(path);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    out << row(m.row(i).transpose()) << '\n';
  }
  finish(out, path);
}

void write_beats_csv(const std::string& path, const std::vector<Beat>& beats,
                     double fs) {
  auto out = open_out(path);
  out << "beat_index,beat_time_s,confidence_sum\n";
  for (const Beat& b : beats) {
    out << b.index << ',' << format_double(static_cast<double>(b.index) / fs) << ','
        << format_double(b.confidence_sum) << '\n';
  }
  finish(out, path);
}

std::vector<std::size_t> read_beats_csv(const std::string& path) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw FormatError("beats: empty file");
  strip_cr(line);
  const auto header = split(line);
  if (header.empty() || header[0] != "beat_index") {
    throw FormatError("beats: header must start with 'beat_index'");
  }
  std::vector<std::size_t> beats;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) continue;
    const auto fields = split(line);
    const std::string where = "beats line " + std::to_string(line_no);
    if (fields.size() != header.size()) throw FormatError(where + ": wrong field count");
    const std::size_t idx = to_index(fields[0], where);
    if (!beats.empty() && idx <= beats.back()) {
      throw FormatError(where + ": beat indices must increase");
    }
    beats.push_back(idx);
  }
  return beats;
}

void write_hr_csv(const std::string& path, const HrSeries& hr) {
  auto out = open_out(path);
  out << "window_center_s,hr_bpm\n";
  for (const HrSample& s : hr.samples) {
    out << format_double(s.time_s) << ',';
    if (s.bpm) out << format_double(*s.bpm);
    out << '\n';
  }
  finish(out, path);
}

HrSeries read_hr_csv(const std::string& path) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw FormatError("hr: empty file");
  strip_cr(line);
  if (line != "window_center_s,hr_bpm") {
    throw FormatError("hr: header must be 'window_center_s,hr_bpm'");
  }
  HrSeries hr;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) continue;
    const auto fields = split(line);
    const std::string where = "hr line " + std::to_string(line_no);
    if (fields.size() != 2) throw FormatError(where + ": wrong field count");
    HrSample s;
    s.time_s = to_double(fields[0], where);
    if (!fields[1].empty()) s.bpm = to_double(fields[1], where);
    if (!hr.samples.empty() && !(s.time_s > hr.samples.back().time_s)) {
      throw FormatError(where + ": window times must increase");
    }
    hr.samples.push_back(s);
  }
  return hr;
}

void write_confidence_csv(const std::string& path, const ConfidenceSeries& series) {
  auto out = open_out(path);
  out << "channel,peak_index,confidence\n";
  for (std::size_t c = 0; c < series.channels.size(); ++c) {
    for (const ConfidencePoint& p : series.channels[c]) {
      out << c << ',' << p.peak_index << ',' << format_double(p.confidence) << '\n';
    }
  }
  finish(out, path);
}

void write_synth_sidecar(const std::string& path, const SynthConfig& config,
                         const Eigen::VectorXd& planted_template) {
  auto out = open_out(path);
  out << synth_config_text(config) << "template=" << row(planted_template) << '\n';
  finish(out, path);
}

Eigen::VectorXd read_sidecar_template(const std::string& path) {
  const Config config = Config::load(path);
  const auto values = config.get_doubles("template", {});
  if (values.empty()) throw FormatError("sidecar: no template row");
  return Eigen::Map<const Eigen::VectorXd>(values.data(),
                                           static_cast<Eigen::Index>(values.size()));
}

void write_text_file(const std::string& path, const std::string& text) {
  auto out = open_out(path);
  out << text;
  finish(out, path);
}

}  // namespace bcgmil
