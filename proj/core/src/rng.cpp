#include "mbl/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <unordered_set>

#include "mbl/errors.hpp"

namespace mbl {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
}

std::uint64_t splitmix64_mix(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t SeededRng::next_u64() noexcept {
  ++counter_;
  return splitmix64_mix(seed_ + counter_ * kGolden);
}

std::uint64_t SeededRng::uniform_below(std::uint64_t bound) {
  if (bound == 0) throw UsageError("uniform_below: bound must be positive");
  // Reject the low (2^64 mod bound) values so the modulo is exactly uniform.
  const std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    const std::uint64_t x = next_u64();
    if (x >= threshold) return x % bound;
  }
}

double SeededRng::uniform01() noexcept {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double SeededRng::normal() {
  // u1 in (0, 1] keeps log finite.
  const double u1 = 1.0 - uniform01();
  const double u2 = uniform01();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

SeededRng SeededRng::fork(std::uint64_t stream) const noexcept {
  return SeededRng(splitmix64_mix(seed_ ^ splitmix64_mix(stream + kGolden)));
}

void shuffle(std::span<std::size_t> items, SeededRng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.uniform_below(i));
    std::swap(items[i - 1], items[j]);
  }
}

std::vector<std::size_t> random_permutation(std::size_t n, SeededRng& rng) {
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  shuffle(perm, rng);
  return perm;
}

IndexSet sample_without_replacement(std::size_t n, std::size_t count, SeededRng& rng) {
  if (count > n) throw UsageError("sample_without_replacement: count exceeds population");
  if (count == n) return full_index_set(n);
  std::unordered_set<std::size_t> chosen;
  chosen.reserve(count * 2);
  for (std::size_t j = n - count; j < n; ++j) {
    const std::size_t t = static_cast<std::size_t>(rng.uniform_below(j + 1));
    if (!chosen.insert(t).second) chosen.insert(j);
  }
  IndexSet out(chosen.begin(), chosen.end());
  std::sort(out.begin(), out.end());
  return out;
}

IndexSet subsample(const IndexSet& pool, std::size_t count, SeededRng& rng) {
  IndexSet positions = sample_without_replacement(pool.size(), count, rng);
  for (auto& p : positions) p = pool[p];
  // pool is sorted and positions ascend, so the result is already sorted.
  return positions;
}

}  // namespace mbl
