#pragma once

#include <memory>
#include <span>
#include <string_view>

#include "mbl/linalg.hpp"

namespace mbl {

enum class ObjectiveKind {
  logistic_l2,  // log(1 + exp(-y w.x))
  sigmoid_lsq,  // (s(w.x) - t)^2 with t = (y + 1) / 2 in {0, 1}; nonconvex
  quadratic,    // 1/2 sum_j h_j (w_j - x_j)^2, x the example's (dense-expanded) features
};

std::string_view to_string(ObjectiveKind kind);
ObjectiveKind parse_objective_kind(std::string_view name);

/// Loss value and exact gradient of a subset objective.
struct SubsetGradient {
  Vector gradient;
  double loss = 0.0;
  std::size_t subset_size = 0;
};

/// Unnormalized sums of per-example losses and gradients over a block of
/// examples. Blocks over disjoint index sets combine by addition, which is
/// how the driver reuses overlap gradients without re-evaluating examples.
struct PartialSums {
  Vector grad_sum;
  double loss_sum = 0.0;
  std::size_t count = 0;

  explicit PartialSums(std::size_t dimension = 0) : grad_sum(dimension, 0.0) {}
  PartialSums& operator+=(const PartialSums& other);
};

/// Regularized empirical risk over a dataset:
///
///   F^S(w) = (1/|S|) sum_{i in S} f_i(w) + (sigma/2) ||w||^2
///
/// The regularizer is applied once per subset evaluation, so every subset
/// gradient is an unbiased estimate of the full gradient.
class Objective {
 public:
  Objective(ObjectiveKind kind, std::shared_ptr<const Dataset> data, double sigma);

  /// Quadratic objective with per-coordinate curvature h (h_j > 0).
  /// An empty `curvature` means h = 1 everywhere.
  static Objective quadratic(std::shared_ptr<const Dataset> data, double sigma,
                             Vector curvature = {});

  ObjectiveKind kind() const noexcept { return kind_; }
  double sigma() const noexcept { return sigma_; }
  const Dataset& data() const noexcept { return *data_; }
  std::shared_ptr<const Dataset> data_ptr() const noexcept { return data_; }
  std::size_t dimension() const noexcept { return data_->dimension(); }
  std::size_t size() const noexcept { return data_->size(); }

  /// Data-term sums over `subset` (may be empty). Indices must be < n.
  /// Throws NumericError naming the example when a loss or gradient term is
  /// not finite.
  PartialSums accumulate(std::span<const double> w, std::span<const std::size_t> subset) const;

  /// Averages `sums` and adds the regularizer. Throws UsageError on count 0.
  SubsetGradient finalize(const PartialSums& sums, std::span<const double> w) const;

  SubsetGradient eval_subset(std::span<const double> w,
                             std::span<const std::size_t> subset) const;

  SubsetGradient eval_full(std::span<const double> w) const;

  /// Fraction of examples classified correctly (prediction +1 iff w.x > 0).
  /// Always 0 for the quadratic kind, which has no labels to predict.
  double accuracy(std::span<const double> w) const;

 private:
  ObjectiveKind kind_;
  std::shared_ptr<const Dataset> data_;
  double sigma_;
  Vector curvature_;
};

}  // namespace mbl
