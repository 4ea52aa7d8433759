#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace mbl {

// Dense iterate / gradient storage. Length is the problem dimension d.
using Vector = std::vector<double>;

// Sorted, duplicate-free list of example indices.
using IndexSet = std::vector<std::size_t>;

/// One training example in compressed sparse form.
///
/// `indices` are strictly increasing feature ids, `values` the matching
/// feature values, `label` is -1 or +1.
struct SparseExample {
  std::vector<std::size_t> indices;
  std::vector<double> values;
  double label = 1.0;
};

/// A set of n examples over d features.
class Dataset {
 public:
  Dataset() = default;

  /// Validates every row against `dimension`; throws DataError on a bad row.
  Dataset(std::vector<SparseExample> examples, std::size_t dimension);

  std::size_t size() const noexcept { return examples_.size(); }
  std::size_t dimension() const noexcept { return dimension_; }
  const SparseExample& operator[](std::size_t i) const { return examples_[i]; }
  const std::vector<SparseExample>& examples() const noexcept { return examples_; }

 private:
  std::vector<SparseExample> examples_;
  std::size_t dimension_ = 0;
};

// Checks the per-row invariants. Throws DataError naming the offending row.
void validate_example(const SparseExample& row, std::size_t dimension, std::size_t row_id);

// All reductions accumulate in index order so identical inputs give
// bit-identical results.
double dot(std::span<const double> a, std::span<const double> b);
double squared_norm(std::span<const double> a);
double norm(std::span<const double> a);

/// Returns alpha * x + y.
Vector axpy(double alpha, std::span<const double> x, std::span<const double> y);

/// In-place y += alpha * x.
void axpy_inplace(double alpha, std::span<const double> x, std::span<double> y);

void scale_inplace(double alpha, std::span<double> x);

/// Sum over stored entries of value * w[index]. Throws DataError when an
/// index is outside w.
double sparse_dot(const SparseExample& row, std::span<const double> w);

/// g[index] += alpha * value for every stored entry. Indices are assumed
/// validated against g.size().
void sparse_axpy(double alpha, const SparseExample& row, std::span<double> g);

bool all_finite(std::span<const double> x);

IndexSet full_index_set(std::size_t n);

}  // namespace mbl
