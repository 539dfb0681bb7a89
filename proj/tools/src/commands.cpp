#include "bcgmil_cli/commands.hpp"

#include <cmath>
#include <sstream>

#include "bcgmil/baselines.hpp"
#include "bcgmil/detector.hpp"
#include "bcgmil/errors.hpp"
#include "bcgmil/evaluation.hpp"
#include "bcgmil/fumi.hpp"
#include "bcgmil/heart_rate.hpp"
#include "bcgmil/io.hpp"
#include "bcgmil/synth.hpp"

namespace bcgmil::cli {

namespace {

Config load_settings(const Settings& settings) {
  Config config;
  if (settings.config_path) config = Config::load(*settings.config_path);
  for (const auto& [key, value] : settings.overrides) config.set(key, value);
  return config;
}

void warn_unused(const Config& config, Streams io) {
  for (const auto& key : config.unused_keys()) {
    io.err << "warning: config key '" << key << "' is not used by this command\n";
  }
}

template <typename Body>
int guarded(Streams io, Body&& body) {
  try {
    return body();
  } catch (const FormatError& e) {
    io.err << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const DimensionError& e) {
    io.err << "error: model mismatch: " << e.what() << '\n';
    return kModelMismatch;
  } catch (const ParameterError& e) {
    io.err << "error: bad parameter: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    io.err << "error: " << e.what() << '\n';
    return kFailure;
  }
}

bool has_reference(const Recording& rec) {
  return rec.gt_beat_times && !rec.gt_beat_times->empty();
}

std::string stat(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string("na");
}

std::string model_sidecar(const std::string& model, const char* suffix) {
  return model + suffix;
}

}  // namespace

std::optional<Mode> parse_mode(const std::string& text) {
  if (text == "individual") return Mode::kIndividual;
  if (text == "batch") return Mode::kBatch;
  if (text == "exercise") return Mode::kExercise;
  return std::nullopt;
}

int cmd_synth(const SynthRequest& request, Streams io) {
  return guarded(io, [&] {
    const Config config = load_settings(request.settings);
    SynthConfig synth;
    read_synth_config(config, synth);
    warn_unused(config, io);
    const SynthOutput output = generate(synth);
    write_recording_csv(request.out, output.recording);
    write_synth_sidecar(request.out + ".meta", synth, output.planted_template);
    io.out << "samples=" << output.recording.num_samples() << '\n'
           << "beats=" << output.recording.gt_beat_times->size() << '\n'
           << "noise_sd=" << format_double(output.noise_sd) << '\n';
    return static_cast<int>(kOk);
  });
}

int cmd_train(const TrainRequest& request, Streams io) {
  return guarded(io, [&]() -> int {
    const Config config = load_settings(request.settings);
    FumiParams params;
    if (request.mode == Mode::kBatch) {
      // Pooled training over many recordings needs a larger dictionary.
      params.num_target = 9;
      params.num_background = 9;
      params.lambda = 1e-3;
      params.beta = 120.0;
    }
    read_fumi_params(config, params);
    params.validate();
    FeatureOptions features;
    read_feature_options(config, features);
    DetectionParams base;
    read_detection_params(config, base);
    CodingParams coding;
    read_coding_params(config, coding);
    const double ridge = config.get_double("covariance_ridge", 1e-6);
    const std::uint64_t seed = config.get_u64("seed", 1);
    const int per_positive = config.get_int("bag_instances_per_channel", 3);
    if (per_positive < 1) throw ParameterError("bag_instances_per_channel must be >= 1");
    warn_unused(config, io);

    if (request.recordings.empty()) throw FormatError("no training recording given");
    if (request.recordings.size() > 1 && request.mode != Mode::kBatch) {
      throw FormatError("several training recordings need --mode batch");
    }
    std::vector<Recording> recordings;
    for (const auto& path : request.recordings) {
      recordings.push_back(read_recording_csv(path));
      if (!has_reference(recordings.back())) {
        io.err << "error: '" << path << "' has no groundtruth beats\n";
        return kMissingGroundTruth;
      }
      if (recordings.back().sample_rate_hz != recordings.front().sample_rate_hz) {
        throw FormatError("training recordings differ in sample rate");
      }
    }

    std::vector<Bag> bags;
    for (const auto& rec : recordings) {
      auto more = recording_bags(rec, features, static_cast<std::size_t>(per_positive));
      for (auto& b : more) bags.push_back(std::move(b));
    }
    const TrainingSet data = TrainingSet::from_bags(bags);
    const FitResult result = fit(data, params, seed);

    io.out << "em_iter,objective\n";
    for (std::size_t i = 0; i < result.objective_trace.size(); ++i) {
      io.out << i << ',' << format_double(result.objective_trace[i]) << '\n';
    }
    io.out << "converged=" << (result.converged ? 1 : 0) << '\n'
           << "iterations=" << result.iterations << '\n'
           << "reseeds=" << result.reseeds << '\n'
           << "psi=" << format_double(result.psi) << '\n';

    const BackgroundModel background = BackgroundModel::estimate(data.negative, ridge);
    if (background.ridge_raised()) {
      io.err << "warning: covariance ridge raised to " << format_double(background.ridge())
             << '\n';
    }
    const HsdDetector detector(result.dictionary, background, coding);
    std::vector<TrainingDetection> training;
    for (const auto& rec : recordings) {
      training.push_back({confidence_series(rec, detector, features), *rec.gt_beat_times});
    }
    const DetectionParams learned =
        learn_detection_params(training, recordings.front().sample_rate_hz, base);
    io.out << "threshold=" << format_double(learned.threshold) << '\n'
           << "neighborhood=" << learned.neighborhood << '\n';

    write_dictionary_csv(request.out, result.dictionary);
    write_matrix_csv(model_sidecar(request.out, ".background.csv"), background.covariance());
    std::ostringstream det;
    det << "threshold=" << format_double(learned.threshold) << '\n'
        << "neighborhood=" << learned.neighborhood << '\n'
        << "min_votes=" << learned.min_votes << '\n'
        << "refractory=" << learned.refractory << '\n'
        << "detector_lambda=" << format_double(coding.lambda) << '\n'
        << "detector_iterations=" << coding.iterations << '\n'
        << "band_low_hz=" << format_double(features.low_hz) << '\n'
        << "band_high_hz=" << format_double(features.high_hz) << '\n'
        << "filter_order=" << features.filter_order << '\n'
        << "min_separation=" << features.min_separation << '\n'
        << "half_len=" << features.half_len << '\n'
        << "zscore=" << (features.zscore ? 1 : 0) << '\n';
    write_text_file(model_sidecar(request.out, ".detector.txt"), det.str());
    return kOk;
  });
}

int cmd_detect(const DetectRequest& request, Streams io) {
  return guarded(io, [&]() -> int {
    // Model settings first; user settings override them.
    Config config = Config::load(model_sidecar(request.model, ".detector.txt"));
    const Config user = load_settings(request.settings);
    for (const auto& [key, value] : user.values()) config.set(key, value);

    FeatureOptions features;
    read_feature_options(config, features);
    DetectionParams params;
    read_detection_params(config, params);
    CodingParams coding;
    read_coding_params(config, coding);
    WindowGrid grid;
    read_window_grid(config, grid);
    DftOptions dft;
    read_dft_options(config, dft);
    warn_unused(config, io);

    const Recording rec = read_recording_csv(request.recording);
    rec.validate();
    const Dictionary dict = read_dictionary_csv(request.model);
    const BackgroundModel background = BackgroundModel::from_covariance(
        read_matrix_csv(model_sidecar(request.model, ".background.csv")));
    const HsdDetector detector(dict, background, coding);

    const ConfidenceSeries series = confidence_series(rec, detector, features);
    const std::vector<Beat> beats = vote_beats(series, params);
    const double fs = rec.sample_rate_hz;
    // Batch models are scored per window from the confidence spectrum.
    const bool use_dft = request.dft || request.mode == Mode::kBatch;
    const HrSeries hr =
        use_dft ? hr_from_confidence_dft(series, fs, rec.duration_s(), grid, dft)
                : hr_from_beats(beat_indices(beats), fs, rec.duration_s(), grid);

    write_beats_csv(request.out + ".beats.csv", beats, fs);
    write_hr_csv(request.out + ".hr.csv", hr);
    write_confidence_csv(request.out + ".confidence.csv", series);
    io.out << "beats=" << beats.size() << '\n'
           << "windows=" << hr.size() << '\n'
           << "gaps=" << hr.gap_count() << '\n'
           << "hr_method=" << (use_dft ? "dft" : "beats") << '\n';
    return kOk;
  });
}

int cmd_eval(const EvalRequest& request, Streams io) {
  return guarded(io, [&]() -> int {
    const Config config = load_settings(request.settings);
    WindowGrid grid;
    read_window_grid(config, grid);
    const std::string ba_mode = config.get_string("bland_altman_pairs", "per_beat");
    if (ba_mode != "per_beat" && ba_mode != "per_window") {
      throw FormatError("bland_altman_pairs must be per_beat or per_window");
    }
    const double tolerance_s = config.get_double("match_tolerance_s", 0.3);
    warn_unused(config, io);

    const HrSeries est = read_hr_csv(request.estimate_hr);
    const Recording ref = read_recording_csv(request.reference);
    if (!has_reference(ref)) {
      io.err << "error: '" << request.reference << "' has no groundtruth beats\n";
      return kMissingGroundTruth;
    }
    const double fs = ref.sample_rate_hz;
    const auto& gt_beats = *ref.gt_beat_times;
    const HrSeries gt = hr_from_beats(gt_beats, fs, ref.duration_s(), grid);

    const auto window_pairs = aligned_pairs(est, gt);
    if (window_pairs.empty()) {
      io.err << "error: estimate and reference share no heart-rate window\n";
      return kEvaluationImpossible;
    }
    const double mae = mean_absolute_error(est, gt);

    std::optional<std::vector<std::size_t>> est_beats;
    if (request.estimate_beats) est_beats = read_beats_csv(*request.estimate_beats);

    std::optional<double> bbi;
    std::vector<std::pair<double, double>> ba_pairs;
    std::string ba_used = "per_window";
    if (est_beats) {
      try {
        bbi = bbi_relative_error(*est_beats, gt_beats, fs, tolerance_s);
      } catch (const DataError&) {
      }
      if (ba_mode == "per_beat") {
        ba_pairs = per_beat_hr_pairs(*est_beats, gt_beats, fs, tolerance_s);
        ba_used = "per_beat";
      }
    }
    if (ba_used == "per_window") ba_pairs = window_pairs;

    std::optional<AgreementStats> ba;
    try {
      ba = bland_altman(ba_pairs);
    } catch (const DataError&) {
    }

    std::vector<double> e;
    std::vector<double> g;
    for (const auto& [a, b] : window_pairs) {
      e.push_back(a);
      g.push_back(b);
    }
    std::optional<double> r;
    try {
      r = pearson_r(e, g);
    } catch (const DataError&) {
    }

    std::optional<double> t;
    std::optional<double> baseline_mae;
    std::string t_reference = "groundtruth";
    if (request.baseline_hr) {
      t_reference = "baseline";
      const HrSeries base = read_hr_csv(*request.baseline_hr);
      try {
        baseline_mae = mean_absolute_error(base, gt);
      } catch (const DataError&) {
      }
      // Absolute errors of both methods on windows where all three exist.
      std::vector<double> err_est;
      std::vector<double> err_base;
      for (const HrSample& s : est.samples) {
        if (!s.bpm) continue;
        HrSeries one;
        one.samples.push_back(s);
        const auto ge = aligned_pairs(one, gt);
        const auto be = aligned_pairs(one, base);
        if (ge.empty() || be.empty()) continue;
        const double truth = ge.front().second;
        err_est.push_back(std::abs(*s.bpm - truth));
        err_base.push_back(std::abs(be.front().second - truth));
      }
      try {
        t = paired_t(err_est, err_base);
      } catch (const std::exception&) {
      }
    } else {
      try {
        t = paired_t(e, g);
      } catch (const DataError&) {
      }
    }

    std::ostringstream report;
    report << "mae_bpm=" << format_double(mae) << '\n'
           << "windows_compared=" << window_pairs.size() << '\n'
           << "bbi_relative_error_percent=" << stat(bbi) << '\n'
           << "bland_altman_pairs=" << ba_used << '\n'
           << "bland_altman_n=" << (ba ? ba->n : 0) << '\n'
           << "bland_altman_bias=" << stat(ba ? std::optional(ba->bias) : std::nullopt) << '\n'
           << "bland_altman_sd=" << stat(ba ? std::optional(ba->sd) : std::nullopt) << '\n'
           << "bland_altman_loa_low=" << stat(ba ? std::optional(ba->loa_low) : std::nullopt)
           << '\n'
           << "bland_altman_loa_high="
           << stat(ba ? std::optional(ba->loa_high) : std::nullopt) << '\n'
           << "pearson_r=" << stat(r) << '\n'
           << "paired_t=" << stat(t) << '\n'
           << "paired_t_reference=" << t_reference << '\n';
    if (request.baseline_hr) report << "baseline_mae_bpm=" << stat(baseline_mae) << '\n';
    write_text_file(request.out, report.str());

    std::ostringstream windows;
    windows << "window_center_s,est_bpm,gt_bpm,abs_error_bpm\n";
    for (const HrSample& s : est.samples) {
      HrSeries one;
      one.samples.push_back(s);
      HrSeries one_gt;
      for (const HrSample& q : gt.samples) {
        if (std::abs(q.time_s - s.time_s) <= 1e-6) one_gt.samples.push_back(q);
      }
      windows << format_double(s.time_s) << ',' << (s.bpm ? format_double(*s.bpm) : "")
              << ',';
      if (!one_gt.samples.empty() && one_gt.samples.front().bpm) {
        windows << format_double(*one_gt.samples.front().bpm);
      }
      windows << ',';
      const auto p = aligned_pairs(one, one_gt);
      if (!p.empty()) windows << format_double(std::abs(p.front().first - p.front().second));
      windows << '\n';
    }
    write_text_file(request.out + ".windows.csv", windows.str());
    io.out << report.str();
    return kOk;
  });
}

int cmd_baseline(const BaselineRequest& request, Streams io) {
  return guarded(io, [&]() -> int {
    const Config config = load_settings(request.settings);
    BaselineOptions options;
    read_baseline_options(config, options);
    warn_unused(config, io);

    BaselineMethod method;
    if (request.method == "wppd") {
      method = BaselineMethod::kWppd;
    } else if (request.method == "en") {
      method = BaselineMethod::kEn;
    } else {
      throw FormatError("baseline method must be wppd or en");
    }

    const Recording rec = read_recording_csv(request.recording);
    std::size_t channel = static_cast<std::size_t>(request.channel.value_or(0));
    if (request.training) {
      const Recording training = read_recording_csv(*request.training);
      if (!has_reference(training)) {
        io.err << "error: '" << *request.training << "' has no groundtruth beats\n";
        return kMissingGroundTruth;
      }
      channel = best_baseline_channel(method, training, options);
    }
    if (request.channel && *request.channel < 0) throw FormatError("channel must be >= 0");
    if (channel >= rec.channels.size()) throw FormatError("channel out of range");

    const BaselineResult result =
        run_baseline(method, rec.channels[channel], rec.sample_rate_hz, options);
    std::ostringstream beats;
    beats << "beat_index,beat_time_s\n";
    for (std::size_t b : result.beats) {
      beats << b << ',' << format_double(static_cast<double>(b) / rec.sample_rate_hz) << '\n';
    }
    write_text_file(request.out + ".beats.csv", beats.str());
    write_hr_csv(request.out + ".hr.csv", result.hr);
    io.out << "channel=" << channel << '\n'
           << "beats=" << result.beats.size() << '\n'
           << "median_relative_prominence="
           << format_double(result.median_relative_prominence) << '\n'
           << "low_confidence=" << (result.low_confidence ? 1 : 0) << '\n';
    return kOk;
  });
}

}  // namespace bcgmil::cli
