#pragma once

#include <optional>
#include <span>
#include <vector>

#include "mbl/objective.hpp"
#include "mbl/rng.hpp"

namespace mbl {

struct RatioSummary {
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  std::size_t count = 0;  // components with y_d != 0
};

/// How well a subsampled curvature vector y_s tracks the full-batch y_d.
struct CurvatureDiagnostic {
  double cosine = 0.0;  // <y_s, y_d> / (||y_s|| ||y_d||)
  RatioSummary ratio;   // componentwise y_s / y_d
};

/// nullopt when either vector has zero norm.
std::optional<CurvatureDiagnostic> compare_curvature(std::span<const double> y_s,
                                                     std::span<const double> y_d);

/// Quartiles by linear interpolation between order statistics.
RatioSummary summarize(std::vector<double> values);

struct BatchDiagnostics {
  std::size_t batch_size = 0;
  std::vector<CurvatureDiagnostic> trials;
  std::size_t discarded = 0;  // trials with a zero-norm y
  double median_cosine = 0.0;
};

/// From w, takes the gradient step w' = w - step * grad F(w) and measures
/// y_d = grad F(w') - grad F(w). For each batch size, `trials` random subsets
/// S give y_s = g^S(w') - g^S(w), compared against y_d.
std::vector<BatchDiagnostics> curvature_diagnostics(const Objective& obj,
                                                    std::span<const double> w,
                                                    std::span<const std::size_t> batch_sizes,
                                                    std::size_t trials, SeededRng& rng,
                                                    double step = 0.1);

}  // namespace mbl
