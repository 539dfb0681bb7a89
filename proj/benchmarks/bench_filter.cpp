#include <cmath>
#include <vector>

#include <benchmark/benchmark.h>

#include "bcgmil/filter.hpp"

namespace {

void BM_Bandpass(benchmark::State& state) {
  std::vector<double> x(static_cast<std::size_t>(state.range(0)));
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::sin(0.07 * static_cast<double>(i));
  for (auto _ : state) benchmark::DoNotOptimize(bcgmil::bandpass_filter(x, 100.0, 0.4, 10.0));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Bandpass)->Arg(6000)->Arg(30000);

}  // namespace
