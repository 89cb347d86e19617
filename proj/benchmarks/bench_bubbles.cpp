#include <memory>
#include <vector>

#include <benchmark/benchmark.h>

#include "hwb/bubbles.hpp"
#include "hwb/ground_state.hpp"
#include "hwb/linearized.hpp"
#include "hwb/modulation.hpp"
#include "hwb/runner.hpp"

using namespace hwb;

namespace {

const ProfileBank& bank() {
  static auto b = reference_bank(1024, 1.0, 1e-12, 1e-11);
  return *b;
}

const std::vector<BubbleParams> kPair = {{0.05, 0.1, 0.04, -3.0, 0.7}, {0.06, 0.12, 0.05, 3.0, -1.1}};

void BM_GroundState(benchmark::State& state) {
  LineGrid line(static_cast<std::size_t>(state.range(0)), 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(solve_ground_state(line, 3, 1e-12, 2000));
}
BENCHMARK(BM_GroundState)->Arg(512)->Arg(1024)->Unit(benchmark::kMillisecond);

void BM_ProfileChain(benchmark::State& state) {
  LineGrid line(1024, 1.0);
  auto gs = solve_ground_state(line, 3, 1e-12, 2000);
  for (auto _ : state) benchmark::DoNotOptimize(build_profile_chain(gs, 1e-11));
}
BENCHMARK(BM_ProfileChain)->Unit(benchmark::kMillisecond);

void BM_RenderPair(benchmark::State& state) {
  Grid1D g(static_cast<std::size_t>(state.range(0)), 25.6);
  bank();
  for (auto _ : state) benchmark::DoNotOptimize(multi_bubble(g, kPair, bank()));
}
BENCHMARK(BM_RenderPair)->Arg(1 << 14)->Arg(1 << 16)->Unit(benchmark::kMillisecond);

void BM_Decompose(benchmark::State& state) {
  Grid1D g(static_cast<std::size_t>(state.range(0)), 25.6);
  auto u = multi_bubble(g, kPair, bank());
  auto guess = kPair;
  guess[0].lambda *= 1.002;
  guess[1].gamma += 1e-3;
  for (auto _ : state) benchmark::DoNotOptimize(decompose(u, guess, bank()));
}
BENCHMARK(BM_Decompose)->Arg(1 << 14)->Arg(1 << 16)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
