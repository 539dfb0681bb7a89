#ifndef BCGMIL_CLI_COMMANDS_HPP_
#define BCGMIL_CLI_COMMANDS_HPP_

// Command implementations behind the `bcgmil` executable. Each returns a
// process exit code and writes diagnostics to `err`, so they can be driven
// from tests without spawning processes.

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "bcgmil/config.hpp"

namespace bcgmil::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kConfigError = 2,
  kMissingGroundTruth = 3,
  kModelMismatch = 4,
  kEvaluationImpossible = 5,
};

enum class Mode { kIndividual, kBatch, kExercise };

// "individual" | "batch" | "exercise"; nullopt otherwise.
std::optional<Mode> parse_mode(const std::string& text);

struct Streams {
  std::ostream& out;
  std::ostream& err;
};

// Settings shared by every command: an optional key=value file plus
// command-line overrides that win over it.
struct Settings {
  std::optional<std::string> config_path;
  std::vector<std::pair<std::string, std::string>> overrides;
};

struct SynthRequest {
  Settings settings;
  std::string out;  // recording CSV; sidecar goes to <out>.meta
};

struct TrainRequest {
  Settings settings;
  std::vector<std::string> recordings;
  // Dictionary CSV; <out>.background.csv and <out>.detector.txt beside it.
  std::string out;
  Mode mode = Mode::kIndividual;
};

struct DetectRequest {
  Settings settings;
  std::string recording;
  std::string model;  // dictionary CSV written by train
  std::string out;    // prefix for .beats.csv, .hr.csv, .confidence.csv
  // kBatch implies dft; individual and exercise only differ in intent.
  Mode mode = Mode::kIndividual;
  bool dft = false;
};

struct EvalRequest {
  Settings settings;
  std::string estimate_hr;
  std::optional<std::string> estimate_beats;
  std::string reference;  // recording CSV with a gt column
  std::optional<std::string> baseline_hr;
  std::string out;        // report; per-window errors in <out>.windows.csv
};

struct BaselineRequest {
  Settings settings;
  std::string recording;
  std::string method;  // "wppd" | "en"
  // Channel chosen by lowest MAE on this recording when given; otherwise
  // `channel` (default 0) is used.
  std::optional<std::string> training;
  std::optional<int> channel;
  std::string out;  // prefix for .beats.csv and .hr.csv
};

int cmd_synth(const SynthRequest& request, Streams io);
int cmd_train(const TrainRequest& request, Streams io);
int cmd_detect(const DetectRequest& request, Streams io);
int cmd_eval(const EvalRequest& request, Streams io);
int cmd_baseline(const BaselineRequest& request, Streams io);

}  // namespace bcgmil::cli

#endif  // BCGMIL_CLI_COMMANDS_HPP_
