#include <benchmark/benchmark.h>

#include <vector>

#include "shufreg/deconv.hpp"
#include "shufreg/dist1d.hpp"
#include "shufreg/experiments.hpp"
#include "shufreg/regress.hpp"
#include "shufreg/synth.hpp"

using namespace shufreg;

namespace {

std::vector<double> normals(std::size_t n, std::uint64_t seed) {
  CounterRng rng(StreamKey::derive(seed, "bench"));
  std::vector<double> v(n);
  for (auto& x : v) x = rng.normal();
  return v;
}

void BM_W1Empirical(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const EmpiricalMeasure a(normals(n, 1)), b(normals(n, 2));
  for (auto _ : state) benchmark::DoNotOptimize(w1_empirical(a, b));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_W1Empirical)->RangeMultiplier(10)->Range(100, 100000)->Complexity();

void BM_DeconvolveCdf(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto d = sample_dataset(Mode::deconv, n, IdentityLink{}, NoiseSpec::gaussian(), 0.1, 3);
  const EmpiricalMeasure ys(d.y);
  const auto bw = select_bandwidth(n, 0.1, NoiseSpec::gaussian(), BandwidthRule{});
  const auto grid = GridSpec::covering(d.y, 0.1);
  for (auto _ : state) benchmark::DoNotOptimize(deconvolve_cdf(ys, NoiseSpec::gaussian(), 0.1, bw.h, grid));
}
BENCHMARK(BM_DeconvolveCdf)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_FitShuffled(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto d = sample_dataset(Mode::shuffled, n, CubeLink{}, NoiseSpec::gaussian(), 0.1, 4);
  for (auto _ : state) benchmark::DoNotOptimize(fit_shuffled(d.x_ordered, d.y, 0.1, FitConfig{}));
}
BENCHMARK(BM_FitShuffled)->RangeMultiplier(10)->Range(100, 100000)->Unit(benchmark::kMicrosecond);

void BM_ConjectureReplication(benchmark::State& state) {
  const auto n = static_cast<std::uint64_t>(state.range(0));
  std::vector<std::uint32_t> counts;
  std::uint64_t rep = 0;
  for (auto _ : state) {
    CounterRng rng(StreamKey::derive(5, "bench-conjecture").child(rep++));
    sample_uniform_multinomial(n, rng, counts);
    const auto occ = occupancy_histogram(counts);
    benchmark::DoNotOptimize(conjecture_product_occupancy(occ, n, 10.0, 20.0));
  }
}
BENCHMARK(BM_ConjectureReplication)->RangeMultiplier(10)->Range(100, 1000000)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
