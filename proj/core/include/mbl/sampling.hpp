#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include "mbl/linalg.hpp"
#include "mbl/rng.hpp"

namespace mbl {

enum class SamplingMode {
  strategy1,  // overlaps forced into consecutive batches of a shuffled pass
  strategy2,  // independent batches, overlap subsampled from the batch
  fault,      // batch is the union of shards of nodes that responded
};

std::string_view to_string(SamplingMode mode);
SamplingMode parse_sampling_mode(std::string_view name);

/// Index sets used by one iteration.
///
/// `overlap_next` is the set on which this iteration's curvature pair is
/// measured (both gradients of y are taken on it); the next plan carries the
/// same set as `overlap_prev`.
struct SamplePlan {
  IndexSet batch;
  IndexSet overlap_prev;
  IndexSet overlap_next;
  SamplingMode mode = SamplingMode::strategy1;
  std::vector<std::size_t> responders;  // fault mode: nodes that returned
  std::size_t redraws = 0;              // fault mode: empty-response redraws
  std::size_t epoch = 0;                // strategy 1: pass over the data
};

/// Simulated cluster: B nodes, each owning one shard of the data.
struct NodeLayout {
  std::vector<IndexSet> shards;
  double fail_prob = 0.0;

  std::size_t nodes() const noexcept { return shards.size(); }
};

// ceil(r * n), at least 1.
std::size_t batch_size(std::size_t n, double batch_frac);
// ceil(o * |S|), at least 1.
std::size_t overlap_size(std::size_t batch, double overlap_frac);

/// Rejects configurations whose overlap would be empty or, for strategy 1,
/// leave no room for samples unique to a batch (2|O| >= |S|).
void validate_multibatch(std::size_t n, double batch_frac, double overlap_frac,
                         SamplingMode mode);

/// One shuffled pass for strategy 1. Batches are S_0 = {N_0, O_0} and
/// S_k = {O_{k-1}, N_k, O_k}; the final batch is padded to full size with
/// already-used indices when the pass runs out. The last plan's
/// `overlap_next` is left empty: it depends on the next pass.
std::vector<SamplePlan> plan_strategy1_epoch(std::size_t n, double batch_frac,
                                             double overlap_frac, SeededRng& rng);

/// Independent uniform batch with an overlap subsampled from it.
SamplePlan plan_strategy2(std::size_t n, double batch_frac, double overlap_frac,
                          SeededRng& rng);

/// Random balanced partition of [0, n) into `nodes` shards.
NodeLayout make_layout(std::size_t n, std::size_t nodes, double fail_prob, SeededRng& rng);

/// New random balanced partition over the same indices and node count.
NodeLayout reshard(const NodeLayout& layout, SeededRng& rng);

struct FaultDraw {
  std::vector<std::size_t> responders;
  SamplePlan plan;
};

/// Each node responds independently with probability 1 - p; an all-failed
/// draw is repeated (and counted in plan.redraws).
FaultDraw plan_fault(const NodeLayout& layout, SeededRng& rng);

IndexSet set_intersection(const IndexSet& a, const IndexSet& b);
IndexSet set_difference(const IndexSet& a, const IndexSet& b);
IndexSet set_union(const IndexSet& a, const IndexSet& b);

struct SamplerConfig {
  SamplingMode mode = SamplingMode::strategy1;
  double batch_frac = 0.05;
  double overlap_frac = 0.2;
  std::size_t nodes = 16;
  double fail_prob = 0.0;
  bool reshard_each_epoch = false;
};

/// Stateful plan stream feeding the driver.
///
/// Plans are produced one ahead so that each returned plan already knows
/// `overlap_next` = the set its pair will be measured on. For strategy 1 and
/// fault mode that set is exactly S_k ∩ S_{k+1}.
class BatchSampler {
 public:
  BatchSampler(const SamplerConfig& config, std::size_t n, SeededRng rng);

  SamplePlan next();

  const SamplerConfig& config() const noexcept { return config_; }
  const NodeLayout& layout() const noexcept { return layout_; }

 private:
  SamplePlan draw();

  SamplerConfig config_;
  std::size_t n_;
  SeededRng rng_;
  NodeLayout layout_;
  std::vector<SamplePlan> epoch_plans_;
  std::size_t epoch_pos_ = 0;
  std::size_t epoch_ = 0;
  std::size_t drawn_samples_ = 0;
  std::optional<SamplePlan> pending_;
};

}  // namespace mbl
