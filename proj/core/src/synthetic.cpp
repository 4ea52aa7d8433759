#include "mbl/synthetic.hpp"

#include <cmath>

#include "mbl/errors.hpp"
#include "mbl/rng.hpp"

namespace mbl {

namespace {
constexpr int kMaxRedraws = 10000;
}

Dataset make_synthetic(const SyntheticSpec& spec) {
  if (spec.n == 0 || spec.d == 0) throw ConfigError("synthetic: n and d must be positive");
  if (spec.nnz_per_row == 0 || spec.nnz_per_row > spec.d) {
    throw ConfigError("synthetic: nnz per row must be in [1, d]");
  }
  if (!(spec.margin >= 0.0)) throw ConfigError("synthetic: margin must be >= 0");

  SeededRng rng(spec.seed);
  SeededRng plane_rng = rng.fork(0);
  SeededRng row_rng = rng.fork(1);

  Vector plane(spec.d);
  for (double& v : plane) v = plane_rng.normal();
  const double plane_norm = norm(plane);

  std::vector<SparseExample> rows;
  rows.reserve(spec.n);
  for (std::size_t i = 0; i < spec.n; ++i) {
    SparseExample row;
    for (int attempt = 0;; ++attempt) {
      if (attempt == kMaxRedraws) {
        throw ConfigError("synthetic: margin " + std::to_string(spec.margin) +
                          " unreachable for this nnz/d");
      }
      row.indices = sample_without_replacement(spec.d, spec.nnz_per_row, row_rng);
      row.values.resize(row.indices.size());
      for (double& v : row.values) v = row_rng.normal();
      if (spec.margin == 0.0) {
        row.label = row_rng.bernoulli(0.5) ? 1.0 : -1.0;
        break;
      }
      const double side = sparse_dot(row, plane) / plane_norm;
      if (std::abs(side) >= spec.margin) {
        row.label = side > 0.0 ? 1.0 : -1.0;
        break;
      }
    }
    rows.push_back(std::move(row));
  }
  return Dataset(std::move(rows), spec.d);
}

}  // namespace mbl
