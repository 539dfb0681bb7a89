#include <fstream>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "bcgmil/config.hpp"
#include "bcgmil/errors.hpp"
#include "bcgmil/io.hpp"
#include "bcgmil/synth.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

namespace bcgmil {
namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// --- config -------------------------------------------------------------

TEST(Config, ParsesKeyValueWithComments) {
  const auto c = Config::parse_string("# learner\nlambda = 0.01\n\n num_target=4 # trailing\n");
  EXPECT_DOUBLE_EQ(c.get_double("lambda", 0.0), 0.01);
  EXPECT_EQ(c.get_int("num_target", 0), 4);
  EXPECT_EQ(c.get_int("missing", 7), 7);
}

TEST(Config, Errors) {
  EXPECT_THROW(Config::parse_string("lambda 0.01\n"), FormatError);
  EXPECT_THROW(Config::parse_string("=3\n"), FormatError);
  EXPECT_THROW(Config::parse_string("a=1\na=2\n"), FormatError);
  EXPECT_THROW(Config::parse_string("a=abc\n").get_double("a", 0.0), FormatError);
  EXPECT_THROW(Config::load("/nonexistent/dir/x.cfg"), FormatError);
}

TEST(Config, ListsAndUnusedKeys) {
  const auto c = Config::parse_string("gains=1,0.5, 2\ntypo_key=3\n");
  EXPECT_EQ(c.get_doubles("gains", {}), (std::vector<double>{1.0, 0.5, 2.0}));
  EXPECT_EQ(c.unused_keys(), (std::vector<std::string>{"typo_key"}));
}

TEST(Config, FumiParamsOverride) {
  auto c = Config::parse_string("num_target=9\nnum_background=9\nlambda=1e-3\nbeta=120\npsi=2\n");
  FumiParams p;
  read_fumi_params(c, p);
  EXPECT_EQ(p.num_target, 9);
  EXPECT_EQ(p.num_background, 9);
  EXPECT_DOUBLE_EQ(p.lambda, 1e-3);
  EXPECT_DOUBLE_EQ(p.beta, 120.0);
  ASSERT_TRUE(p.psi.has_value());
  EXPECT_DOUBLE_EQ(*p.psi, 2.0);
  EXPECT_DOUBLE_EQ(p.gamma_scale, 5e-3);
  for (const auto& key : fumi_param_keys()) {
    EXPECT_FALSE(key.empty());
  }
}

TEST(Config, SynthConfigRoundTrip) {
  SynthConfig a = fixtures::hrv_test_config(42);
  a.respiration_amplitude = 0.125;
  a.delays = {1, 2, 4, 8};
  SynthConfig b;
  read_synth_config(Config::parse_string(synth_config_text(a)), b);
  EXPECT_EQ(synth_config_text(a), synth_config_text(b));
  EXPECT_EQ(b.seed, 42u);
  EXPECT_EQ(b.delays, a.delays);
  EXPECT_EQ(b.snr_db, a.snr_db);
}

TEST(Config, FormatDoubleRoundTrips) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g(0.0, 1e3);
  for (int i = 0; i < 200; ++i) {
    const double v = g(rng);
    EXPECT_EQ(std::stod(format_double(v)), v);
  }
  EXPECT_EQ(format_double(0.5), "0.5");
}

// --- recordings ---------------------------------------------------------

TEST(RecordingCsv, RoundTrip) {
  fixtures::TempDir dir("io");
  SynthConfig c = fixtures::training_config(3);
  c.duration_s = 20.0;
  const SynthOutput s = generate(c);
  write_recording_csv(dir.file("r.csv"), s.recording);
  const Recording r = read_recording_csv(dir.file("r.csv"));
  EXPECT_DOUBLE_EQ(r.sample_rate_hz, 100.0);
  EXPECT_EQ(r.channels, s.recording.channels);
  EXPECT_EQ(r.gt_beat_times, s.recording.gt_beat_times);
}

TEST(RecordingCsv, WithoutReference) {
  std::istringstream in("t,ch0,ch1\n0,1,2\n0.01,3,4\n0.02,5,6\n");
  const Recording r = parse_recording_csv(in);
  EXPECT_EQ(r.channels.size(), 2u);
  EXPECT_FALSE(r.gt_beat_times.has_value());
  EXPECT_DOUBLE_EQ(r.sample_rate_hz, 100.0);
  EXPECT_EQ(r.channels[1], (std::vector<double>{2, 4, 6}));
}

TEST(RecordingCsv, TruncatedRowIsFormatError) {
  std::istringstream in("t,ch0,ch1,ch2,ch3,gt\n0,1,2,3,4,0\n0.01,1,2\n");
  EXPECT_THROW(parse_recording_csv(in), FormatError);
}

TEST(RecordingCsv, TruncatedFileIsFormatError) {
  fixtures::TempDir dir("trunc");
  const SynthOutput s = generate(fixtures::clean_config(60.0, 5.0));
  write_recording_csv(dir.file("r.csv"), s.recording);
  std::string text = slurp(dir.file("r.csv"));
  text.resize(text.size() / 2);
  // Cut in the middle of a row so the last line is short.
  while (!text.empty() && text.back() != ',') text.pop_back();
  std::istringstream in(text);
  EXPECT_THROW(parse_recording_csv(in), FormatError);
}

TEST(RecordingCsv, BadContent) {
  std::istringstream bad_header("time,ch0\n0,1\n0.01,2\n");
  EXPECT_THROW(parse_recording_csv(bad_header), FormatError);
  std::istringstream bad_number("t,ch0\n0,1\n0.01,x\n");
  EXPECT_THROW(parse_recording_csv(bad_number), FormatError);
  std::istringstream uneven("t,ch0\n0,1\n0.01,2\n0.05,3\n");
  EXPECT_THROW(parse_recording_csv(uneven), FormatError);
  EXPECT_THROW(read_recording_csv("/nonexistent/r.csv"), FormatError);
}

// --- model files --------------------------------------------------------

TEST(DictionaryCsv, RoundTrip) {
  fixtures::TempDir dir("dict");
  std::mt19937_64 rng(4);
  Dictionary d;
  d.target = oracle::unit_columns(oracle::random_matrix(rng, 91, 3));
  d.background = oracle::unit_columns(oracle::random_matrix(rng, 91, 2));
  write_dictionary_csv(dir.file("d.csv"), d);
  const Dictionary e = read_dictionary_csv(dir.file("d.csv"));
  EXPECT_EQ(e.target, d.target);
  EXPECT_EQ(e.background, d.background);
  EXPECT_EQ(slurp(dir.file("d.csv")).substr(0, 11), "kind,s0,s1,");
}

TEST(DictionaryCsv, TruncatedIsFormatError) {
  fixtures::TempDir dir("dtrunc");
  std::mt19937_64 rng(5);
  Dictionary d;
  d.target = oracle::random_matrix(rng, 91, 1);
  d.background = oracle::random_matrix(rng, 91, 1);
  write_dictionary_csv(dir.file("d.csv"), d);
  std::string text = slurp(dir.file("d.csv"));
  text.resize(text.size() - 40);
  write_text_file(dir.file("t.csv"), text);
  EXPECT_THROW(read_dictionary_csv(dir.file("t.csv")), FormatError);
}

TEST(MatrixCsv, RoundTrip) {
  fixtures::TempDir dir("mat");
  std::mt19937_64 rng(6);
  const Eigen::MatrixXd m = oracle::random_matrix(rng, 7, 5);
  write_matrix_csv(dir.file("m.csv"), m);
  EXPECT_EQ(read_matrix_csv(dir.file("m.csv")), m);
}

TEST(HrCsv, RoundTripWithGaps) {
  fixtures::TempDir dir("hr");
  HrSeries hr;
  hr.samples = {{30.0, 61.25}, {45.0, std::nullopt}, {60.0, 59.0}};
  write_hr_csv(dir.file("hr.csv"), hr);
  const HrSeries back = read_hr_csv(dir.file("hr.csv"));
  ASSERT_EQ(back.size(), 3u);
  EXPECT_EQ(back.samples[0].bpm, std::optional<double>(61.25));
  EXPECT_FALSE(back.samples[1].bpm.has_value());
  EXPECT_DOUBLE_EQ(back.samples[2].time_s, 60.0);
}

TEST(BeatsCsv, RoundTrip) {
  fixtures::TempDir dir("beats");
  const std::vector<Beat> beats{{120, 4.5}, {230, 3.25}};
  write_beats_csv(dir.file("b.csv"), beats, 100.0);
  EXPECT_EQ(read_beats_csv(dir.file("b.csv")), (std::vector<std::size_t>{120, 230}));
  write_text_file(dir.file("bad.csv"), "beat_index,beat_time_s\n200,2\n100,1\n");
  EXPECT_THROW(read_beats_csv(dir.file("bad.csv")), FormatError);
}

TEST(Sidecar, StoresTemplate) {
  fixtures::TempDir dir("meta");
  const SynthConfig c = fixtures::clean_config(60.0, 10.0);
  const Eigen::VectorXd t = make_template(c.shape, c.fs);
  write_synth_sidecar(dir.file("r.meta"), c, t);
  EXPECT_EQ(read_sidecar_template(dir.file("r.meta")), t);
  const Config cfg = Config::load(dir.file("r.meta"));
  EXPECT_DOUBLE_EQ(cfg.get_double("hr_mean_bpm", 0.0), 60.0);
}

}  // namespace
}  // namespace bcgmil
