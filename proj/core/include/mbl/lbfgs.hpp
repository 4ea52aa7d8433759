#pragma once

#include <cstddef>
#include <deque>
#include <span>
#include <utility>

#include "mbl/linalg.hpp"

namespace mbl {

/// Correction pair (s, y) with rho = 1 / (y.s).
struct CurvaturePair {
  Vector s;
  Vector y;
  double rho = 0.0;

  friend bool operator==(const CurvaturePair&, const CurvaturePair&) = default;
};

/// How the initial inverse Hessian H0 = gamma * I is chosen.
struct ScalingPolicy {
  enum class Kind { bb, fixed };
  Kind kind = Kind::bb;
  double gamma0 = 1.0;  // used by Kind::fixed

  static ScalingPolicy bb() { return {}; }
  static ScalingPolicy fixed(double gamma) { return {Kind::fixed, gamma}; }

  friend bool operator==(const ScalingPolicy&, const ScalingPolicy&) = default;
};

inline constexpr std::size_t kDefaultMemory = 10;
inline constexpr double kDefaultCautiousEps = 1e-4;

/// Cautious admission test: y.s >= eps * ||s||^2.
///
/// With eps == 0 the pair must still have y.s > 0 and
/// y.s >= 1e-12 * ||s|| * ||y|| so rho stays finite. Throws UsageError when
/// s is the zero vector or the lengths differ.
bool cautious_accept(std::span<const double> s, std::span<const double> y, double eps);

/// Bounded FIFO of curvature pairs, oldest first.
class LbfgsMemory {
 public:
  explicit LbfgsMemory(std::size_t capacity = kDefaultMemory,
                       ScalingPolicy scaling = ScalingPolicy::bb(),
                       double cautious_eps = kDefaultCautiousEps);

  /// Appends the pair when cautious_accept passes, evicting the oldest pair
  /// when full. A rejected pair leaves the memory untouched.
  bool admit(std::span<const double> s, std::span<const double> y);

  /// gamma for H0 = gamma * I. BB: s.y / y.y of the newest pair, or 1 when
  /// empty. Fixed: gamma0.
  double initial_scaling() const;

  /// p = -H g by the two-loop recursion, O(m d). Throws NumericError naming
  /// the pair when an intermediate becomes non-finite.
  Vector direction(std::span<const double> g) const;

  std::size_t capacity() const noexcept { return capacity_; }
  std::size_t size() const noexcept { return pairs_.size(); }
  bool empty() const noexcept { return pairs_.empty(); }
  const std::deque<CurvaturePair>& pairs() const noexcept { return pairs_; }
  const ScalingPolicy& scaling() const noexcept { return scaling_; }
  double cautious_eps() const noexcept { return cautious_eps_; }

  void clear() noexcept { pairs_.clear(); }

  friend bool operator==(const LbfgsMemory&, const LbfgsMemory&) = default;

 private:
  std::size_t capacity_;
  ScalingPolicy scaling_;
  double cautious_eps_;
  std::deque<CurvaturePair> pairs_;
};

// Value-style wrappers over LbfgsMemory.
std::pair<LbfgsMemory, bool> admit_pair(LbfgsMemory mem, std::span<const double> s,
                                        std::span<const double> y);
double initial_scaling(const LbfgsMemory& mem);
Vector two_loop_direction(const LbfgsMemory& mem, std::span<const double> g);

}  // namespace mbl
