#include "mbl/linalg.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "mbl/errors.hpp"

namespace mbl {

namespace {

void require_same_length(std::size_t a, std::size_t b, const char* op) {
  if (a != b) {
    throw UsageError(std::string(op) + ": dimension mismatch (" + std::to_string(a) +
                     " vs " + std::to_string(b) + ")");
  }
}

}  // namespace

void validate_example(const SparseExample& row, std::size_t dimension, std::size_t row_id) {
  const auto where = [&] { return "row " + std::to_string(row_id) + ": "; };
  if (row.indices.size() != row.values.size()) {
    throw DataError(where() + "index/value count mismatch");
  }
  for (std::size_t j = 0; j < row.indices.size(); ++j) {
    if (row.indices[j] >= dimension) {
      throw DataError(where() + "feature index " + std::to_string(row.indices[j]) +
                      " out of range for dimension " + std::to_string(dimension));
    }
    if (j > 0 && row.indices[j] <= row.indices[j - 1]) {
      throw DataError(where() + "feature indices not strictly increasing");
    }
    if (!std::isfinite(row.values[j])) {
      throw DataError(where() + "non-finite feature value");
    }
  }
  if (row.label != 1.0 && row.label != -1.0) {
    throw DataError(where() + "label must be -1 or +1");
  }
}

Dataset::Dataset(std::vector<SparseExample> examples, std::size_t dimension)
    : examples_(std::move(examples)), dimension_(dimension) {
  if (examples_.empty()) throw DataError("dataset has no examples");
  if (dimension_ == 0) throw DataError("dataset dimension must be positive");
  for (std::size_t i = 0; i < examples_.size(); ++i) {
    validate_example(examples_[i], dimension_, i);
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  require_same_length(a.size(), b.size(), "dot");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double squared_norm(std::span<const double> a) {
  double acc = 0.0;
  for (double v : a) acc += v * v;
  return acc;
}

double norm(std::span<const double> a) { return std::sqrt(squared_norm(a)); }

Vector axpy(double alpha, std::span<const double> x, std::span<const double> y) {
  require_same_length(x.size(), y.size(), "axpy");
  Vector out(y.begin(), y.end());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] += alpha * x[i];
  return out;
}

void axpy_inplace(double alpha, std::span<const double> x, std::span<double> y) {
  require_same_length(x.size(), y.size(), "axpy");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

void scale_inplace(double alpha, std::span<double> x) {
  for (double& v : x) v *= alpha;
}

double sparse_dot(const SparseExample& row, std::span<const double> w) {
  double acc = 0.0;
  for (std::size_t j = 0; j < row.indices.size(); ++j) {
    const std::size_t idx = row.indices[j];
    if (idx >= w.size()) {
      throw DataError("sparse_dot: feature index " + std::to_string(idx) +
                      " out of range for dimension " + std::to_string(w.size()));
    }
    acc += row.values[j] * w[idx];
  }
  return acc;
}

void sparse_axpy(double alpha, const SparseExample& row, std::span<double> g) {
  for (std::size_t j = 0; j < row.indices.size(); ++j) {
    g[row.indices[j]] += alpha * row.values[j];
  }
}

bool all_finite(std::span<const double> x) {
  for (double v : x) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

IndexSet full_index_set(std::size_t n) {
  IndexSet all(n);
  std::iota(all.begin(), all.end(), std::size_t{0});
  return all;
}

}  // namespace mbl
