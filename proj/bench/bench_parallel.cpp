// Serial reference vs OpenMP versions of the two parallel kernels.
#include <benchmark/benchmark.h>

#include <array>

#include "gpclt/kernel.hpp"
#include "gpclt/simulate.hpp"

namespace {

const gpclt::IncrementVarianceSpec kSpec = gpclt::IncrementVarianceSpec::power(1.5);
const gpclt::GridSpec kGrid{0.0, 1.0, 1.0 / 64, 8};

void BM_SamplePathsSerial(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(gpclt::sample_paths_serial(kSpec, kGrid, n, 1));
  }
}

void BM_SamplePathsParallel(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(gpclt::sample_paths(kSpec, kGrid, n, 1));
  }
}

constexpr std::array<int, 4> kKs{1, 2, 3, 4};
constexpr std::array<double, 4> kHs{1.0 / 256, 1.0 / 1024, 1.0 / 4096, 1.0 / 16384};

void BM_MomentTableSerial(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        gpclt::moment_table_serial(kSpec, {0.0, 1.0}, kKs, kHs, 1e-10, false));
  }
}

void BM_MomentTableParallel(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(gpclt::moment_table(kSpec, {0.0, 1.0}, kKs, kHs, 1e-10, false));
  }
}

}  // namespace

BENCHMARK(BM_SamplePathsSerial)->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SamplePathsParallel)->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MomentTableSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MomentTableParallel)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
