#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string_view>
#include <vector>

#include "mbl/linalg.hpp"

namespace mbl {

/// Counter-based generator ("splitmix64-ctr").
///
/// Draw i of seed s is splitmix64_mix(s + (i + 1) * 0x9E3779B97F4A7C15).
/// Uniform ints, doubles and shuffles use integer arithmetic only, so a
/// (seed, draw sequence) replays bit-identically on every platform. std::
/// distributions are not used because their output is implementation-defined.
/// normal() goes through libm log/cos and is only as portable as libm.
class SeededRng {
 public:
  using result_type = std::uint64_t;

  static constexpr std::string_view algorithm = "splitmix64-ctr";

  explicit SeededRng(std::uint64_t seed = 0) noexcept : seed_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t draws() const noexcept { return counter_; }

  std::uint64_t next_u64() noexcept;
  std::uint64_t operator()() noexcept { return next_u64(); }
  static constexpr std::uint64_t min() noexcept { return 0; }
  static constexpr std::uint64_t max() noexcept {
    return std::numeric_limits<std::uint64_t>::max();
  }

  /// Uniform integer in [0, bound). bound must be positive.
  std::uint64_t uniform_below(std::uint64_t bound);

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01() noexcept;

  /// Standard normal via Box-Muller (one draw pair per call, second discarded).
  double normal();

  bool bernoulli(double p) noexcept { return uniform01() < p; }

  /// Independent child stream; does not advance this generator.
  SeededRng fork(std::uint64_t stream) const noexcept;

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

std::uint64_t splitmix64_mix(std::uint64_t z) noexcept;

/// Fisher-Yates shuffle driven by `rng`.
void shuffle(std::span<std::size_t> items, SeededRng& rng);

std::vector<std::size_t> random_permutation(std::size_t n, SeededRng& rng);

/// `count` distinct values from [0, n), returned sorted (Floyd's algorithm).
IndexSet sample_without_replacement(std::size_t n, std::size_t count, SeededRng& rng);

/// `count` distinct members of `pool`, returned sorted.
IndexSet subsample(const IndexSet& pool, std::size_t count, SeededRng& rng);

}  // namespace mbl
