#include <random>

#include <benchmark/benchmark.h>

#include "hwb/evolver.hpp"
#include "hwb/spectral.hpp"

using namespace hwb;

namespace {

SpectralField noise(const Grid1D& g) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd;
  CVec v(g.size());
  for (auto& z : v) z = cplx(nd(rng), nd(rng));
  return SpectralField(g, v);
}

void BM_HalfLaplacian(benchmark::State& state) {
  Grid1D g(static_cast<std::size_t>(state.range(0)), 200.0);
  auto u = noise(g);
  for (auto _ : state) benchmark::DoNotOptimize(fractional_laplacian(u, 0.5));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_HalfLaplacian)->RangeMultiplier(4)->Range(1 << 12, 1 << 18)->Complexity(benchmark::oNLogN);

void BM_StrangStep(benchmark::State& state) {
  Grid1D g(static_cast<std::size_t>(state.range(0)), 25.6);
  Evolver ev(g);
  SimulationState s{.t = -0.4, .u = noise(g)};
  for (auto _ : state) {
    s = ev.step(s, 1e-6, Direction::forward);
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_StrangStep)->RangeMultiplier(4)->Range(1 << 14, 1 << 18)->Unit(benchmark::kMicrosecond);

void BM_Conserved(benchmark::State& state) {
  Grid1D g(static_cast<std::size_t>(state.range(0)), 25.6);
  auto u = noise(g);
  for (auto _ : state) benchmark::DoNotOptimize(conserved(u));
}
BENCHMARK(BM_Conserved)->Arg(1 << 16)->Arg(1 << 18)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
