#include <benchmark/benchmark.h>

#include <memory>

#include "mbl/objective.hpp"
#include "mbl/rng.hpp"
#include "mbl/synthetic.hpp"

namespace {

// Args: batch size, nonzeros per row (d = 1000).
void BM_EvalSubset(benchmark::State& state) {
  const auto batch = static_cast<std::size_t>(state.range(0));
  const auto nnz = static_cast<std::size_t>(state.range(1));
  auto data = std::make_shared<const mbl::Dataset>(mbl::make_synthetic({20000, 1000, nnz, 0.0, 1}));
  const mbl::Objective obj(mbl::ObjectiveKind::logistic_l2, data, 1.0 / 20000);
  mbl::SeededRng rng(3);
  const mbl::IndexSet subset = mbl::sample_without_replacement(20000, batch, rng);
  mbl::Vector w(1000);
  for (auto& x : w) x = 0.01 * rng.normal();
  for (auto _ : state) benchmark::DoNotOptimize(obj.eval_subset(w, subset));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(batch));
}
BENCHMARK(BM_EvalSubset)->ArgsProduct({{200, 1000, 10000}, {10, 100}});

}  // namespace
