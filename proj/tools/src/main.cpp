#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bcgmil/config.hpp"
#include "bcgmil_cli/commands.hpp"

namespace {

using bcgmil::cli::Settings;

// --config, --seed and repeated --set key=value, shared by all commands.
struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> sets;

  void attach(CLI::App* app) {
    app->add_option("--config", config, "key=value configuration file");
    app->add_option("--seed", seed, "random seed");
    app->add_option("--set", sets, "override a configuration key (key=value)");
  }

  Settings settings(const std::map<std::string, std::string>& extra = {}) const {
    Settings s;
    if (!config.empty()) s.config_path = config;
    for (const auto& item : sets) {
      const auto eq = item.find('=');
      if (eq == std::string::npos || eq == 0) {
        throw CLI::ValidationError("--set", "expected key=value, got '" + item + "'");
      }
      s.overrides.emplace_back(item.substr(0, eq), item.substr(eq + 1));
    }
    for (const auto& [k, v] : extra) s.overrides.emplace_back(k, v);
    if (seed) s.overrides.emplace_back("seed", std::to_string(*seed));
    return s;
  }
};

}  // namespace

int main(int argc, char** argv) {
  namespace cli = bcgmil::cli;
  CLI::App app{"Heartbeat dictionary learning and detection for bed-sensor recordings"};
  app.require_subcommand(1);
  const cli::Streams io{std::cout, std::cerr};

  CommonFlags synth_flags;
  std::string synth_out;
  auto* synth = app.add_subcommand("synth", "generate a synthetic recording");
  synth_flags.attach(synth);
  synth->add_option("-o,--out", synth_out, "recording CSV to write")->required();

  CommonFlags train_flags;
  std::vector<std::string> train_inputs;
  std::string train_out;
  std::string train_mode = "individual";
  std::map<std::string, std::string> fumi_overrides;
  auto* train = app.add_subcommand("train", "learn a dictionary and detection parameters");
  train_flags.attach(train);
  train->add_option("recordings", train_inputs, "training recording CSV(s)")->required();
  train->add_option("-o,--out", train_out, "dictionary CSV to write")->required();
  train->add_option("--mode", train_mode, "individual | batch | exercise");
  // Every learner parameter can be set directly by name.
  std::map<std::string, std::string> fumi_flag_values;
  for (const auto& key : bcgmil::fumi_param_keys()) {
    train->add_option("--" + key, fumi_flag_values[key], "learner parameter " + key);
  }

  CommonFlags detect_flags;
  std::string detect_input;
  std::string detect_model;
  std::string detect_out;
  std::string detect_mode = "individual";
  bool detect_dft = false;
  auto* detect = app.add_subcommand("detect", "detect heartbeats and estimate heart rate");
  detect_flags.attach(detect);
  detect->add_option("recording", detect_input, "recording CSV")->required();
  detect->add_option("--model", detect_model, "dictionary CSV from train")->required();
  detect->add_option("-o,--out", detect_out, "output prefix")->required();
  detect->add_option("--mode", detect_mode, "individual | batch | exercise");
  detect->add_flag("--dft", detect_dft, "heart rate from the confidence spectrum");

  CommonFlags eval_flags;
  cli::EvalRequest eval_req;
  std::string eval_beats;
  std::string eval_baseline;
  auto* eval = app.add_subcommand("eval", "compare estimates with the reference");
  eval_flags.attach(eval);
  eval->add_option("--hr", eval_req.estimate_hr, "estimated HR CSV")->required();
  eval->add_option("--beats", eval_beats, "estimated beats CSV");
  eval->add_option("--reference", eval_req.reference, "recording CSV with gt")->required();
  eval->add_option("--baseline", eval_baseline, "baseline HR CSV for the paired t test");
  eval->add_option("-o,--out", eval_req.out, "metrics report to write")->required();

  CommonFlags base_flags;
  cli::BaselineRequest base_req;
  std::string base_training;
  int base_channel = -1;
  auto* base = app.add_subcommand("baseline", "run the WPPD or EN baseline");
  base_flags.attach(base);
  base->add_option("recording", base_req.recording, "recording CSV")->required();
  base->add_option("--method", base_req.method, "wppd | en")->required();
  base->add_option("--train", base_training, "pick the channel with lowest MAE here");
  base->add_option("--channel", base_channel, "channel to use");
  base->add_option("-o,--out", base_req.out, "output prefix")->required();

  try {
    app.parse(argc, argv);

    if (*synth) {
      return cli::cmd_synth({synth_flags.settings(), synth_out}, io);
    }
    if (*train) {
      const auto mode = cli::parse_mode(train_mode);
      if (!mode) throw CLI::ValidationError("--mode", "unknown mode '" + train_mode + "'");
      for (const auto& key : bcgmil::fumi_param_keys()) {
        if (train->count("--" + key) > 0) fumi_overrides[key] = fumi_flag_values[key];
      }
      cli::TrainRequest req{train_flags.settings(fumi_overrides), train_inputs, train_out,
                            *mode};
      return cli::cmd_train(req, io);
    }
    if (*detect) {
      const auto mode = cli::parse_mode(detect_mode);
      if (!mode) throw CLI::ValidationError("--mode", "unknown mode '" + detect_mode + "'");
      cli::DetectRequest req{detect_flags.settings(), detect_input, detect_model,
                             detect_out,              *mode,        detect_dft};
      return cli::cmd_detect(req, io);
    }
    if (*eval) {
      eval_req.settings = eval_flags.settings();
      if (!eval_beats.empty()) eval_req.estimate_beats = eval_beats;
      if (!eval_baseline.empty()) eval_req.baseline_hr = eval_baseline;
      return cli::cmd_eval(eval_req, io);
    }
    if (*base) {
      base_req.settings = base_flags.settings();
      if (!base_training.empty()) base_req.training = base_training;
      if (base_channel >= 0) base_req.channel = base_channel;
      return cli::cmd_baseline(base_req, io);
    }
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return cli::kConfigError;
  }
  return cli::kFailure;
}
