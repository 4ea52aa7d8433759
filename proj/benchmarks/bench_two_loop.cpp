#include <benchmark/benchmark.h>

#include "mbl/dense_oracle.hpp"
#include "mbl/lbfgs.hpp"
#include "mbl/rng.hpp"

namespace {

mbl::Vector normal_vector(std::size_t d, mbl::SeededRng& rng) {
  mbl::Vector v(d);
  for (auto& x : v) x = rng.normal();
  return v;
}

mbl::LbfgsMemory filled_memory(std::size_t m, std::size_t d) {
  mbl::SeededRng rng(1);
  mbl::LbfgsMemory mem(m, mbl::ScalingPolicy::bb(), 0.0);
  while (mem.size() < m) {
    mbl::Vector s = normal_vector(d, rng);
    mbl::Vector y = s;
    for (std::size_t j = 0; j < d; ++j) y[j] *= 1.0 + static_cast<double>(j % 7);
    mem.admit(s, y);
  }
  return mem;
}

// Args: memory m, dimension d.
void BM_TwoLoop(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  const auto d = static_cast<std::size_t>(state.range(1));
  const mbl::LbfgsMemory mem = filled_memory(m, d);
  mbl::SeededRng rng(2);
  const mbl::Vector g = normal_vector(d, rng);
  for (auto _ : state) benchmark::DoNotOptimize(mem.direction(g));
  state.SetComplexityN(static_cast<benchmark::IterationCount>(m * d));
}
BENCHMARK(BM_TwoLoop)->ArgsProduct({{5, 10, 20}, {100, 10000, 100000}})->Complexity();

void BM_DenseInverseOracle(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  const mbl::LbfgsMemory mem = filled_memory(10, d);
  for (auto _ : state) benchmark::DoNotOptimize(mbl::dense_inverse_oracle(mem, d));
}
BENCHMARK(BM_DenseInverseOracle)->Arg(20)->Arg(100)->Arg(200);

}  // namespace
