#include <benchmark/benchmark.h>

#include "bcgmil/fumi.hpp"
#include "bcgmil/signal.hpp"
#include "bcgmil/synth.hpp"

namespace {

// Full EM run on bags from a synthetic recording of range(0) seconds.
void BM_Fit(benchmark::State& state) {
  bcgmil::SynthConfig c;
  c.duration_s = static_cast<double>(state.range(0));
  c.snr_db = 10.0;
  c.jitter_sd = 2.0;
  const auto data = bcgmil::TrainingSet::from_bags(
      bcgmil::recording_bags(bcgmil::generate(c).recording));
  bcgmil::FumiParams params;
  params.max_em_iters = 20;
  params.tol = 0.0;
  for (auto _ : state) benchmark::DoNotOptimize(bcgmil::fit(data, params, 1));
  state.counters["instances"] =
      static_cast<double>(data.positive.cols() + data.negative.cols());
}
BENCHMARK(BM_Fit)->Arg(60)->Arg(300)->Unit(benchmark::kMillisecond);

}  // namespace
