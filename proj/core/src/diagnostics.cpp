#include "mbl/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include "mbl/errors.hpp"
#include "mbl/linalg.hpp"

namespace mbl {

namespace {

double quantile_sorted(const std::vector<double>& v, double q) {
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return v[lo] + frac * (v[hi] - v[lo]);
}

}  // namespace

RatioSummary summarize(std::vector<double> values) {
  RatioSummary out;
  out.count = values.size();
  if (values.empty()) return out;
  std::sort(values.begin(), values.end());
  out.q1 = quantile_sorted(values, 0.25);
  out.median = quantile_sorted(values, 0.5);
  out.q3 = quantile_sorted(values, 0.75);
  return out;
}

std::optional<CurvatureDiagnostic> compare_curvature(std::span<const double> y_s,
                                                     std::span<const double> y_d) {
  if (y_s.size() != y_d.size()) throw UsageError("compare_curvature: dimension mismatch");
  const double ns = norm(y_s);
  const double nd = norm(y_d);
  if (ns == 0.0 || nd == 0.0) return std::nullopt;
  CurvatureDiagnostic out;
  out.cosine = std::clamp(dot(y_s, y_d) / (ns * nd), -1.0, 1.0);
  std::vector<double> ratios;
  ratios.reserve(y_d.size());
  for (std::size_t j = 0; j < y_d.size(); ++j) {
    if (y_d[j] != 0.0) ratios.push_back(y_s[j] / y_d[j]);
  }
  out.ratio = summarize(std::move(ratios));
  return out;
}

std::vector<BatchDiagnostics> curvature_diagnostics(const Objective& obj,
                                                    std::span<const double> w,
                                                    std::span<const std::size_t> batch_sizes,
                                                    std::size_t trials, SeededRng& rng,
                                                    double step) {
  if (!(step > 0.0)) throw UsageError("curvature_diagnostics: step must be positive");
  const Vector g0 = obj.eval_full(w).gradient;
  const Vector w1 = axpy(-step, g0, w);
  if (std::equal(w1.begin(), w1.end(), w.begin())) {
    throw UsageError("curvature_diagnostics: step leaves w unchanged");
  }
  const Vector y_d = axpy(-1.0, g0, obj.eval_full(w1).gradient);

  std::vector<BatchDiagnostics> out;
  out.reserve(batch_sizes.size());
  for (std::size_t size : batch_sizes) {
    if (size == 0 || size > obj.size()) {
      throw UsageError("curvature_diagnostics: batch size outside [1, n]");
    }
    BatchDiagnostics bd;
    bd.batch_size = size;
    std::vector<double> cosines;
    for (std::size_t t = 0; t < trials; ++t) {
      const IndexSet subset = sample_without_replacement(obj.size(), size, rng);
      const Vector y_s = axpy(-1.0, obj.eval_subset(w, subset).gradient,
                              obj.eval_subset(w1, subset).gradient);
      if (auto diag = compare_curvature(y_s, y_d)) {
        cosines.push_back(diag->cosine);
        bd.trials.push_back(*diag);
      } else {
        ++bd.discarded;
      }
    }
    bd.median_cosine = summarize(std::move(cosines)).median;
    out.push_back(std::move(bd));
  }
  return out;
}

}  // namespace mbl
