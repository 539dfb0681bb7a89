#include <benchmark/benchmark.h>

// Own entry point: the packaged benchmark_main archive is not always
// link-compatible with the installed compiler.
BENCHMARK_MAIN();
