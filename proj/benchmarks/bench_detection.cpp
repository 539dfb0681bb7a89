#include <benchmark/benchmark.h>

#include "bcgmil/detector.hpp"
#include "bcgmil/fumi.hpp"
#include "bcgmil/signal.hpp"
#include "bcgmil/synth.hpp"

namespace {

struct Trained {
  bcgmil::Recording recording;
  bcgmil::Dictionary dictionary;
  bcgmil::BackgroundModel background;
};

const Trained& trained() {
  static const Trained t = [] {
    bcgmil::SynthConfig c;
    c.duration_s = 120.0;
    c.snr_db = 10.0;
    const auto rec = bcgmil::generate(c).recording;
    const auto data = bcgmil::TrainingSet::from_bags(bcgmil::recording_bags(rec));
    const auto r = bcgmil::fit(data, {}, 1);
    return Trained{rec, r.dictionary, bcgmil::BackgroundModel::estimate(data.negative, 1e-6)};
  }();
  return t;
}

// Confidence of every candidate peak in a 2-minute, 4-channel recording.
void BM_ConfidenceSeries(benchmark::State& state) {
  const auto& t = trained();
  const bcgmil::HsdDetector det(t.dictionary, t.background, {});
  for (auto _ : state) benchmark::DoNotOptimize(bcgmil::confidence_series(t.recording, det));
}
BENCHMARK(BM_ConfidenceSeries)->Unit(benchmark::kMillisecond);

void BM_VoteBeats(benchmark::State& state) {
  const auto& t = trained();
  const auto series =
      bcgmil::confidence_series(t.recording, bcgmil::HsdDetector(t.dictionary, t.background, {}));
  for (auto _ : state) benchmark::DoNotOptimize(bcgmil::vote_beats(series, {}));
}
BENCHMARK(BM_VoteBeats);

}  // namespace
