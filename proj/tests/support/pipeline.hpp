#ifndef BCGMIL_TESTS_PIPELINE_HPP_
#define BCGMIL_TESTS_PIPELINE_HPP_

// Train-then-detect helpers mirroring what the command-line tool does,
// for tests that need a learned detector.

#include <cstdint>
#include <vector>

#include "bcgmil/detector.hpp"
#include "bcgmil/fumi.hpp"
#include "bcgmil/heart_rate.hpp"
#include "bcgmil/signal.hpp"

namespace bcgmil::pipeline {

struct Model {
  Dictionary dictionary;
  BackgroundModel background;
  DetectionParams detection;
  CodingParams coding;
  FitResult fit;

  HsdDetector detector() const { return HsdDetector(dictionary, background, coding); }
};

inline Model train(const Recording& recording, const FumiParams& params = {},
                   std::uint64_t seed = 1) {
  const TrainingSet data = TrainingSet::from_bags(recording_bags(recording));
  FitResult result = fit(data, params, seed);
  CodingParams coding;
  coding.lambda = params.lambda;
  BackgroundModel background = BackgroundModel::estimate(data.negative, 1e-6);
  const HsdDetector det(result.dictionary, background, coding);
  DetectionParams detection = learn_detection_params(recording, det);
  return Model{result.dictionary, background, detection, coding, std::move(result)};
}

struct Detection {
  ConfidenceSeries series;
  std::vector<std::size_t> beats;
};

inline Detection detect(const Model& model, const Recording& recording) {
  Detection out;
  out.series = confidence_series(recording, model.detector());
  out.beats = beat_indices(vote_beats(out.series, model.detection));
  return out;
}

}  // namespace bcgmil::pipeline

#endif  // BCGMIL_TESTS_PIPELINE_HPP_
