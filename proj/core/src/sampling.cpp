#include "mbl/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <string>

#include "mbl/errors.hpp"

namespace mbl {

namespace {

// Guards against r * n landing a hair above an integer (0.05 * 5000).
constexpr double kCeilSlack = 1e-9;

IndexSet sorted(std::vector<std::size_t> v) {
  std::sort(v.begin(), v.end());
  return v;
}

}  // namespace

std::string_view to_string(SamplingMode mode) {
  switch (mode) {
    case SamplingMode::strategy1: return "1";
    case SamplingMode::strategy2: return "2";
    case SamplingMode::fault: return "fault";
  }
  return "unknown";
}

SamplingMode parse_sampling_mode(std::string_view name) {
  if (name == "1" || name == "strategy1") return SamplingMode::strategy1;
  if (name == "2" || name == "strategy2") return SamplingMode::strategy2;
  if (name == "fault") return SamplingMode::fault;
  throw ConfigError("unknown sampling strategy '" + std::string(name) + "'");
}

std::size_t batch_size(std::size_t n, double batch_frac) {
  const double raw = std::ceil(batch_frac * static_cast<double>(n) - kCeilSlack);
  return std::clamp<std::size_t>(static_cast<std::size_t>(std::max(raw, 1.0)), 1, n);
}

std::size_t overlap_size(std::size_t batch, double overlap_frac) {
  const double raw = std::ceil(overlap_frac * static_cast<double>(batch) - kCeilSlack);
  return std::max<std::size_t>(static_cast<std::size_t>(std::max(raw, 0.0)), 1);
}

void validate_multibatch(std::size_t n, double batch_frac, double overlap_frac,
                         SamplingMode mode) {
  if (n == 0) throw ConfigError("sampling: empty dataset");
  if (!(batch_frac > 0.0 && batch_frac <= 1.0)) {
    throw ConfigError("sampling: batch fraction must be in (0, 1]");
  }
  if (!(overlap_frac > 0.0 && overlap_frac < 1.0)) {
    throw ConfigError("sampling: overlap fraction must be in (0, 1)");
  }
  if (overlap_frac * batch_frac * static_cast<double>(n) < 1.0 - kCeilSlack) {
    throw ConfigError("sampling: overlap empty (o * r * n < 1)");
  }
  const std::size_t s = batch_size(n, batch_frac);
  const std::size_t o = overlap_size(s, overlap_frac);
  if (mode == SamplingMode::strategy1 && 2 * o >= s) {
    throw ConfigError("sampling: strategy 1 needs 2|O| < |S| (got |S|=" + std::to_string(s) +
                      ", |O|=" + std::to_string(o) + ")");
  }
}

std::vector<SamplePlan> plan_strategy1_epoch(std::size_t n, double batch_frac,
                                             double overlap_frac, SeededRng& rng) {
  validate_multibatch(n, batch_frac, overlap_frac, SamplingMode::strategy1);
  const std::size_t s = batch_size(n, batch_frac);
  const std::size_t o = overlap_size(s, overlap_frac);
  const std::vector<std::size_t> perm = random_permutation(n, rng);

  // Batches as ordered member lists: [O_prev | N | O_next].
  std::vector<std::vector<std::size_t>> members;
  members.emplace_back(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(s));
  std::size_t pos = s;
  while (pos < n) {
    const auto& prev = members.back();
    std::vector<std::size_t> batch(prev.end() - static_cast<std::ptrdiff_t>(o), prev.end());
    const std::size_t fresh = std::min(s - o, n - pos);
    batch.insert(batch.end(), perm.begin() + static_cast<std::ptrdiff_t>(pos),
                 perm.begin() + static_cast<std::ptrdiff_t>(pos + fresh));
    pos += fresh;
    if (batch.size() < s) {
      // Short final batch: top up from this pass, avoiding the previous
      // batch so S_{k-1} ∩ S_k stays exactly O_{k-1}.
      IndexSet taken = sorted(batch);
      const IndexSet prev_set = sorted(prev);
      for (std::size_t idx : perm) {
        if (batch.size() == s) break;
        if (std::binary_search(taken.begin(), taken.end(), idx) ||
            std::binary_search(prev_set.begin(), prev_set.end(), idx)) {
          continue;
        }
        batch.push_back(idx);
      }
    }
    members.push_back(std::move(batch));
  }

  std::vector<SamplePlan> plans(members.size());
  for (std::size_t k = 0; k < members.size(); ++k) {
    SamplePlan& plan = plans[k];
    plan.mode = SamplingMode::strategy1;
    plan.batch = sorted(members[k]);
    if (k + 1 < members.size()) {
      const auto& m = members[k];
      plan.overlap_next = sorted({m.end() - static_cast<std::ptrdiff_t>(o), m.end()});
    }
    if (k > 0) plan.overlap_prev = plans[k - 1].overlap_next;
  }
  return plans;
}

SamplePlan plan_strategy2(std::size_t n, double batch_frac, double overlap_frac,
                          SeededRng& rng) {
  validate_multibatch(n, batch_frac, overlap_frac, SamplingMode::strategy2);
  const std::size_t s = batch_size(n, batch_frac);
  const std::size_t o = overlap_size(s, overlap_frac);
  SamplePlan plan;
  plan.mode = SamplingMode::strategy2;
  plan.batch = sample_without_replacement(n, s, rng);
  plan.overlap_next = subsample(plan.batch, std::min(o, s), rng);
  return plan;
}

NodeLayout make_layout(std::size_t n, std::size_t nodes, double fail_prob, SeededRng& rng) {
  if (nodes == 0) throw ConfigError("fault: node count must be positive");
  if (nodes > n) throw ConfigError("fault: more nodes than examples");
  if (!(fail_prob >= 0.0 && fail_prob < 1.0)) {
    throw ConfigError("fault: failure probability must be in [0, 1)");
  }
  const std::vector<std::size_t> perm = random_permutation(n, rng);
  NodeLayout layout;
  layout.fail_prob = fail_prob;
  layout.shards.resize(nodes);
  // Shard j gets n/B items, the first n%B shards one more.
  const std::size_t base = n / nodes;
  const std::size_t extra = n % nodes;
  std::size_t pos = 0;
  for (std::size_t j = 0; j < nodes; ++j) {
    const std::size_t len = base + (j < extra ? 1 : 0);
    layout.shards[j] = sorted({perm.begin() + static_cast<std::ptrdiff_t>(pos),
                               perm.begin() + static_cast<std::ptrdiff_t>(pos + len)});
    pos += len;
  }
  return layout;
}

NodeLayout reshard(const NodeLayout& layout, SeededRng& rng) {
  std::size_t n = 0;
  for (const auto& shard : layout.shards) n += shard.size();
  return make_layout(n, layout.nodes(), layout.fail_prob, rng);
}

FaultDraw plan_fault(const NodeLayout& layout, SeededRng& rng) {
  if (layout.nodes() == 0) throw ConfigError("fault: layout has no nodes");
  if (!(layout.fail_prob >= 0.0 && layout.fail_prob < 1.0)) {
    throw ConfigError("fault: failure probability must be in [0, 1)");
  }
  FaultDraw draw;
  draw.plan.mode = SamplingMode::fault;
  for (;;) {
    draw.responders.clear();
    for (std::size_t j = 0; j < layout.nodes(); ++j) {
      if (!rng.bernoulli(layout.fail_prob)) draw.responders.push_back(j);
    }
    if (!draw.responders.empty()) break;
    ++draw.plan.redraws;
  }
  for (std::size_t j : draw.responders) {
    const auto& shard = layout.shards[j];
    draw.plan.batch.insert(draw.plan.batch.end(), shard.begin(), shard.end());
  }
  std::sort(draw.plan.batch.begin(), draw.plan.batch.end());
  draw.plan.responders = draw.responders;
  return draw;
}

IndexSet set_intersection(const IndexSet& a, const IndexSet& b) {
  IndexSet out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

IndexSet set_difference(const IndexSet& a, const IndexSet& b) {
  IndexSet out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

IndexSet set_union(const IndexSet& a, const IndexSet& b) {
  IndexSet out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

BatchSampler::BatchSampler(const SamplerConfig& config, std::size_t n, SeededRng rng)
    : config_(config), n_(n), rng_(rng) {
  switch (config_.mode) {
    case SamplingMode::strategy1:
    case SamplingMode::strategy2:
      validate_multibatch(n_, config_.batch_frac, config_.overlap_frac, config_.mode);
      break;
    case SamplingMode::fault:
      layout_ = make_layout(n_, config_.nodes, config_.fail_prob, rng_);
      break;
  }
}

SamplePlan BatchSampler::draw() {
  switch (config_.mode) {
    case SamplingMode::strategy1: {
      if (epoch_pos_ == epoch_plans_.size()) {
        if (!epoch_plans_.empty()) ++epoch_;
        epoch_plans_ = plan_strategy1_epoch(n_, config_.batch_frac, config_.overlap_frac, rng_);
        epoch_pos_ = 0;
      }
      SamplePlan plan = std::move(epoch_plans_[epoch_pos_++]);
      plan.epoch = epoch_;
      return plan;
    }
    case SamplingMode::strategy2:
      return plan_strategy2(n_, config_.batch_frac, config_.overlap_frac, rng_);
    case SamplingMode::fault: {
      if (config_.reshard_each_epoch && drawn_samples_ >= (epoch_ + 1) * n_) {
        layout_ = reshard(layout_, rng_);
        ++epoch_;
      }
      FaultDraw d = plan_fault(layout_, rng_);
      drawn_samples_ += d.plan.batch.size();
      d.plan.epoch = epoch_;
      return std::move(d.plan);
    }
  }
  throw UsageError("sampler: unknown mode");
}

SamplePlan BatchSampler::next() {
  if (!pending_) pending_ = draw();
  SamplePlan current = std::move(*pending_);
  pending_ = draw();
  SamplePlan& upcoming = *pending_;

  switch (config_.mode) {
    case SamplingMode::strategy1:
      if (upcoming.epoch != current.epoch) {
        // Pass boundary: the fresh pass was not built to overlap, so the
        // pair is measured on whatever the two batches share.
        current.overlap_next = set_intersection(current.batch, upcoming.batch);
        upcoming.overlap_prev = current.overlap_next;
      }
      break;
    case SamplingMode::strategy2:
      upcoming.overlap_prev = current.overlap_next;
      break;
    case SamplingMode::fault:
      current.overlap_next = set_intersection(current.batch, upcoming.batch);
      upcoming.overlap_prev = current.overlap_next;
      break;
  }
  return current;
}

}  // namespace mbl
