#include <benchmark/benchmark.h>

#include "mbl/sampling.hpp"

namespace {

void BM_Strategy1Pass(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  mbl::SeededRng rng(1);
  for (auto _ : state) benchmark::DoNotOptimize(mbl::plan_strategy1_epoch(n, 0.05, 0.2, rng));
}
BENCHMARK(BM_Strategy1Pass)->Arg(10000)->Arg(100000);

void BM_Strategy2Plan(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  mbl::SeededRng rng(1);
  for (auto _ : state) benchmark::DoNotOptimize(mbl::plan_strategy2(n, 0.05, 0.2, rng));
}
BENCHMARK(BM_Strategy2Plan)->Arg(10000)->Arg(100000);

void BM_FaultDraw(benchmark::State& state) {
  mbl::SeededRng rng(1);
  const mbl::NodeLayout layout = mbl::make_layout(100000, 16, 0.3, rng);
  for (auto _ : state) benchmark::DoNotOptimize(mbl::plan_fault(layout, rng));
}
BENCHMARK(BM_FaultDraw);

}  // namespace
