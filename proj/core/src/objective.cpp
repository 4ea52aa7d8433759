#include "mbl/objective.hpp"

#include <cmath>
#include <string>

#include "mbl/errors.hpp"

namespace mbl {

namespace {

double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

// log(1 + exp(t)) without overflow.
double softplus(double t) { return std::max(t, 0.0) + std::log1p(std::exp(-std::abs(t))); }

[[noreturn]] void non_finite(std::size_t index) {
  throw NumericError("objective: non-finite loss or gradient at example " +
                     std::to_string(index));
}

}  // namespace

std::string_view to_string(ObjectiveKind kind) {
  switch (kind) {
    case ObjectiveKind::logistic_l2: return "logistic_l2";
    case ObjectiveKind::sigmoid_lsq: return "sigmoid_lsq";
    case ObjectiveKind::quadratic: return "quadratic";
  }
  return "unknown";
}

ObjectiveKind parse_objective_kind(std::string_view name) {
  if (name == "logistic_l2" || name == "logistic") return ObjectiveKind::logistic_l2;
  if (name == "sigmoid_lsq") return ObjectiveKind::sigmoid_lsq;
  if (name == "quadratic") return ObjectiveKind::quadratic;
  throw ConfigError("unknown objective '" + std::string(name) + "'");
}

PartialSums& PartialSums::operator+=(const PartialSums& other) {
  if (grad_sum.empty()) grad_sum.assign(other.grad_sum.size(), 0.0);
  axpy_inplace(1.0, other.grad_sum, grad_sum);
  loss_sum += other.loss_sum;
  count += other.count;
  return *this;
}

Objective::Objective(ObjectiveKind kind, std::shared_ptr<const Dataset> data, double sigma)
    : kind_(kind), data_(std::move(data)), sigma_(sigma) {
  if (!data_ || data_->size() == 0) throw UsageError("objective: empty dataset");
  if (!(sigma_ >= 0.0) || !std::isfinite(sigma_)) {
    throw ConfigError("objective: regularization sigma must be finite and >= 0");
  }
  if (kind_ == ObjectiveKind::quadratic) curvature_.assign(data_->dimension(), 1.0);
}

Objective Objective::quadratic(std::shared_ptr<const Dataset> data, double sigma,
                               Vector curvature) {
  Objective obj(ObjectiveKind::quadratic, std::move(data), sigma);
  if (!curvature.empty()) {
    if (curvature.size() != obj.dimension()) {
      throw UsageError("quadratic: curvature length must equal dimension");
    }
    for (double h : curvature) {
      if (!(h > 0.0) || !std::isfinite(h)) throw ConfigError("quadratic: curvature must be > 0");
    }
    obj.curvature_ = std::move(curvature);
  }
  return obj;
}

PartialSums Objective::accumulate(std::span<const double> w,
                                  std::span<const std::size_t> subset) const {
  const std::size_t d = dimension();
  if (w.size() != d) throw UsageError("objective: iterate length does not match dimension");
  PartialSums out(d);
  out.count = subset.size();
  const Dataset& data = *data_;

  for (std::size_t i : subset) {
    if (i >= data.size()) {
      throw UsageError("objective: example index " + std::to_string(i) + " out of range");
    }
    const SparseExample& row = data[i];
    switch (kind_) {
      case ObjectiveKind::logistic_l2: {
        const double t = -row.label * sparse_dot(row, w);
        const double loss = softplus(t);
        const double dz = -row.label * sigmoid(t);
        if (!std::isfinite(loss) || !std::isfinite(dz)) non_finite(i);
        out.loss_sum += loss;
        sparse_axpy(dz, row, out.grad_sum);
        break;
      }
      case ObjectiveKind::sigmoid_lsq: {
        const double target = 0.5 * (row.label + 1.0);
        const double s = sigmoid(sparse_dot(row, w));
        const double r = s - target;
        const double dz = 2.0 * r * s * (1.0 - s);
        if (!std::isfinite(r) || !std::isfinite(dz)) non_finite(i);
        out.loss_sum += r * r;
        sparse_axpy(dz, row, out.grad_sum);
        break;
      }
      case ObjectiveKind::quadratic: {
        // 1/2 sum_j h_j (w_j - x_j)^2, split into the dense part (added once
        // below, scaled by the block count) and the sparse cross terms.
        double cross = 0.0;
        for (std::size_t j = 0; j < row.indices.size(); ++j) {
          const std::size_t idx = row.indices[j];
          const double h = curvature_[idx];
          const double x = row.values[j];
          cross += h * (0.5 * x * x - w[idx] * x);
          out.grad_sum[idx] -= h * x;
        }
        if (!std::isfinite(cross)) non_finite(i);
        out.loss_sum += cross;
        break;
      }
    }
  }

  if (kind_ == ObjectiveKind::quadratic && out.count > 0) {
    const double c = static_cast<double>(out.count);
    double dense = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      dense += 0.5 * curvature_[j] * w[j] * w[j];
      out.grad_sum[j] += c * curvature_[j] * w[j];
    }
    out.loss_sum += c * dense;
  }
  return out;
}

SubsetGradient Objective::finalize(const PartialSums& sums, std::span<const double> w) const {
  if (sums.count == 0) throw UsageError("objective: empty subset");
  const double inv = 1.0 / static_cast<double>(sums.count);
  SubsetGradient out;
  out.subset_size = sums.count;
  out.gradient = sums.grad_sum;
  scale_inplace(inv, out.gradient);
  out.loss = sums.loss_sum * inv;
  if (sigma_ > 0.0) {
    axpy_inplace(sigma_, w, out.gradient);
    out.loss += 0.5 * sigma_ * squared_norm(w);
  }
  if (!std::isfinite(out.loss) || !all_finite(out.gradient)) {
    throw NumericError("objective: non-finite subset result");
  }
  return out;
}

SubsetGradient Objective::eval_subset(std::span<const double> w,
                                      std::span<const std::size_t> subset) const {
  if (subset.empty()) throw UsageError("objective: empty subset");
  return finalize(accumulate(w, subset), w);
}

SubsetGradient Objective::eval_full(std::span<const double> w) const {
  const IndexSet all = full_index_set(size());
  return eval_subset(w, all);
}

double Objective::accuracy(std::span<const double> w) const {
  if (kind_ == ObjectiveKind::quadratic) return 0.0;
  std::size_t correct = 0;
  for (const auto& row : data_->examples()) {
    const double predicted = sparse_dot(row, w) > 0.0 ? 1.0 : -1.0;
    if (predicted == row.label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(size());
}

}  // namespace mbl
