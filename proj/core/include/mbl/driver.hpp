#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mbl/lbfgs.hpp"
#include "mbl/linalg.hpp"
#include "mbl/objective.hpp"
#include "mbl/sampling.hpp"

namespace mbl {

enum class Method {
  robust_lbfgs,        // pairs measured on the overlap O_k
  inconsistent_lbfgs,  // y = g^{S_{k+1}}(w_{k+1}) - g^{S_k}(w_k)
  multibatch_gd,       // H = I
  serial_sgd,          // one example per iteration
};

std::string_view to_string(Method method);
Method parse_method(std::string_view name);

/// Step length alpha_k.
struct StepSchedule {
  enum class Kind { constant, diminishing, sqrt_horizon };
  Kind kind = Kind::constant;
  double scale = 1.0;    // alpha, beta or c
  double horizon = 1.0;  // tau, sqrt_horizon only

  static StepSchedule constant(double alpha) { return {Kind::constant, alpha, 1.0}; }
  static StepSchedule diminishing(double beta) { return {Kind::diminishing, beta, 1.0}; }
  static StepSchedule sqrt_horizon(double c, double tau) { return {Kind::sqrt_horizon, c, tau}; }

  /// constant: alpha; diminishing: beta / (k + 1); sqrt_horizon: c / sqrt(tau).
  double alpha(std::size_t k) const;

  friend bool operator==(const StepSchedule&, const StepSchedule&) = default;
};

double schedule_alpha(const StepSchedule& schedule, std::size_t k);

/// Parses "constant:<a>", "diminishing:<b>" or "sqrt:<c>,<tau>".
StepSchedule parse_step_schedule(std::string_view text);
/// Inverse of parse_step_schedule.
std::string to_string(const StepSchedule& schedule);

struct RunConfig {
  Method method = Method::robust_lbfgs;
  SamplerConfig sampling;
  StepSchedule schedule = StepSchedule::constant(1.0);
  std::size_t memory = kDefaultMemory;
  double cautious_eps = kDefaultCautiousEps;
  ScalingPolicy scaling = ScalingPolicy::bb();
  double epochs = 10.0;
  std::uint64_t seed = 0;
  // Iterations between full-gradient trace records; 0 picks about one per
  // epoch of work.
  std::size_t trace_stride = 0;
  // Stop once a traced full gradient norm is <= grad_tol (0 disables).
  double grad_tol = 0.0;
  // Hard iteration cap (0 disables).
  std::size_t max_iterations = 0;
  double divergence_factor = 1e6;
  // Starting point; empty means the zero vector.
  Vector initial_point;
};

/// Throws ConfigError when the configuration cannot run on n examples.
void validate(const RunConfig& config, std::size_t n);

/// Default trace stride: ceil(1/r) for multi-batch modes, ceil(1/(1-p)) in
/// fault mode and n for serial SGD.
std::size_t default_trace_stride(const RunConfig& config, std::size_t n);

struct TraceRecord {
  std::size_t k = 0;
  double epoch = 0.0;        // gradient-sample charges to reach w_k, over n
  double grad_norm = 0.0;    // ||grad F(w_k)||, full batch
  double subset_loss = 0.0;  // F^{S_k}(w_k)
  double full_loss = 0.0;
  double train_acc = 0.0;
  bool pair_accepted = false;  // pair (s_k, y_k) admitted at this iterate
  std::size_t sample_size = 0;
  std::size_t overlap_size = 0;  // |O_{k-1}|, the set pair k was measured on
  std::size_t redraws = 0;
  double wall_seconds = 0.0;
};

enum class RunStatus { completed, converged, diverged, numeric_error };
std::string_view to_string(RunStatus status);

struct RunTrace {
  std::vector<TraceRecord> records;
  RunStatus status = RunStatus::completed;
  std::string message;
  std::size_t iterations = 0;
  std::size_t pairs_accepted = 0;
  std::size_t pairs_rejected = 0;  // failed the cautious test
  std::size_t pairs_missing = 0;   // empty overlap or zero step
  std::size_t redraws = 0;
  double sample_charges = 0.0;  // gradient-sample evaluations charged
  Vector final_point;

  bool aborted() const noexcept {
    return status == RunStatus::diverged || status == RunStatus::numeric_error;
  }
};

enum class EvalPurpose {
  batch,          // part of g^{S_k}(w_k)
  overlap_extra,  // indices of O_{k-1} outside S_k (strategy 2)
  metrology,      // full-gradient trace evaluation, not charged
};

struct EvalEvent {
  std::size_t iterate;
  EvalPurpose purpose;
  std::span<const std::size_t> indices;
};

struct IterationEvent {
  std::size_t k;
  std::span<const double> w;
  const SamplePlan& plan;
  const LbfgsMemory& memory;  // after admitting pair k
  bool pair_formed;
  bool pair_accepted;
  std::span<const double> s;  // empty unless pair_formed
  std::span<const double> y;
  std::span<const double> batch_gradient;
};

/// Observation points for audits and tests. Both are optional.
struct RunHooks {
  std::function<void(const EvalEvent&)> on_eval;
  std::function<void(const IterationEvent&)> on_iteration;
};

/// w + alpha * p with p = -H g (two-loop) or p = -g for the first-order
/// methods. Throws NumericError when the result is not finite.
Vector take_step(std::span<const double> w, const LbfgsMemory& mem, std::span<const double> g,
                 double alpha, Method method = Method::robust_lbfgs);

struct PairVectors {
  Vector s;
  Vector y;
};

/// Reference construction of the correction pair for the step from plan k
/// (at w_prev) to plan k+1 (at w_next), evaluating every gradient afresh.
/// Robust: y = g^{O_k}(w_next) - g^{O_k}(w_prev). Inconsistent:
/// y = g^{S_{k+1}}(w_next) - g^{S_k}(w_prev). Returns nullopt when the
/// overlap is empty.
std::optional<PairVectors> form_pair(const SamplePlan& plan, const SamplePlan& next_plan,
                                     std::span<const double> w_prev,
                                     std::span<const double> w_next, const Objective& obj,
                                     Method method = Method::robust_lbfgs);

/// Runs the multi-batch loop until `config.epochs` of gradient-sample work is
/// spent. Aborts (keeping the partial trace) on divergence or numeric error.
RunTrace run(const RunConfig& config, const Objective& obj, const RunHooks& hooks = {});

}  // namespace mbl
