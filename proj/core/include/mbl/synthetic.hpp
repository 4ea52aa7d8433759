#pragma once

#include <cstdint>

#include "mbl/linalg.hpp"

namespace mbl {

struct SyntheticSpec {
  std::size_t n = 5000;
  std::size_t d = 20;
  std::size_t nnz_per_row = 20;
  double margin = 0.1;
  std::uint64_t seed = 1;
};

/// Sparse rows with exactly `nnz_per_row` N(0,1) features at random
/// positions. With margin > 0 labels come from a planted hyperplane w* and
/// rows closer than `margin` to it (|w*.x| / ||w*|| < margin) are redrawn, so
/// the data is linearly separable. With margin == 0 labels are fair coin
/// flips. Throws ConfigError when nnz_per_row > d or the margin is
/// unreachable.
Dataset make_synthetic(const SyntheticSpec& spec);

}  // namespace mbl
