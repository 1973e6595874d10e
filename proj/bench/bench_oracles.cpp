// Parallel oracles against their serial twins.

#include <benchmark/benchmark.h>

#include "salab/kernels.hpp"
#include "salab/oracles.hpp"

namespace {

using namespace salab;

const Distribution kMixture = make_mixture({1.0, 1.0}, {Normal{{-2.0, 0.0}, 1.0}, Normal{{2.0, 0.0}, 1.0}});

Param draw_normal(Rng& rng) { return Param{rng.normal()}; }
double identity(const Param& x) { return x[0]; }

std::vector<Param> mixture_points(std::size_t n) {
  return oracles::draw_points([](Rng& rng) { return sample(kMixture, rng); }, n, 7);
}

void BM_McQuantileParallel(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(oracles::mc_quantile(draw_normal, identity, 0.9, n, 1));
}

void BM_McQuantileSerial(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(oracles::reference::mc_quantile(draw_normal, identity, 0.9, n, 1));
  }
}

void BM_WeiszfeldParallel(benchmark::State& state) {
  const auto pts = mixture_points(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(oracles::weiszfeld(pts, 1e-10, 10'000));
}

void BM_WeiszfeldSerial(benchmark::State& state) {
  const auto pts = mixture_points(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(oracles::reference::weiszfeld(pts, 1e-10, 10'000));
}

void BM_LloydParallel(benchmark::State& state) {
  const auto pts = mixture_points(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    Rng rng(3);
    benchmark::DoNotOptimize(oracles::lloyd(pts, 4, 20, rng));
  }
}

void BM_LloydSerial(benchmark::State& state) {
  const auto pts = mixture_points(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    Rng rng(3);
    benchmark::DoNotOptimize(oracles::reference::lloyd(pts, 4, 20, rng));
  }
}

}  // namespace

BENCHMARK(BM_McQuantileParallel)->Arg(1 << 20)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_McQuantileSerial)->Arg(1 << 20)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_WeiszfeldParallel)->Arg(1 << 18)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_WeiszfeldSerial)->Arg(1 << 18)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LloydParallel)->Arg(1 << 18)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LloydSerial)->Arg(1 << 18)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
