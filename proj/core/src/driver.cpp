#include "mbl/driver.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <sstream>

#include "mbl/errors.hpp"

namespace mbl {

namespace {

double parse_double(std::string_view text, std::string_view what) {
  double value = 0.0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    throw ConfigError("invalid number '" + std::string(text) + "' for " + std::string(what));
  }
  return value;
}

std::string shortest(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

}  // namespace

std::string_view to_string(Method method) {
  switch (method) {
    case Method::robust_lbfgs: return "robust_lbfgs";
    case Method::inconsistent_lbfgs: return "inconsistent_lbfgs";
    case Method::multibatch_gd: return "multibatch_gd";
    case Method::serial_sgd: return "serial_sgd";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  if (name == "robust_lbfgs") return Method::robust_lbfgs;
  if (name == "inconsistent_lbfgs") return Method::inconsistent_lbfgs;
  if (name == "multibatch_gd") return Method::multibatch_gd;
  if (name == "serial_sgd") return Method::serial_sgd;
  throw ConfigError("unknown method '" + std::string(name) + "'");
}

std::string_view to_string(RunStatus status) {
  switch (status) {
    case RunStatus::completed: return "completed";
    case RunStatus::converged: return "converged";
    case RunStatus::diverged: return "diverged";
    case RunStatus::numeric_error: return "numeric_error";
  }
  return "unknown";
}

double StepSchedule::alpha(std::size_t k) const {
  switch (kind) {
    case Kind::constant: return scale;
    case Kind::diminishing: return scale / static_cast<double>(k + 1);
    case Kind::sqrt_horizon: return scale / std::sqrt(horizon);
  }
  return scale;
}

double schedule_alpha(const StepSchedule& schedule, std::size_t k) { return schedule.alpha(k); }

StepSchedule parse_step_schedule(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) {
    throw ConfigError("step schedule '" + std::string(text) + "' needs <kind>:<value>");
  }
  const std::string_view kind = text.substr(0, colon);
  const std::string_view args = text.substr(colon + 1);
  StepSchedule out;
  if (kind == "constant") {
    out = StepSchedule::constant(parse_double(args, "constant step"));
  } else if (kind == "diminishing") {
    out = StepSchedule::diminishing(parse_double(args, "diminishing step"));
  } else if (kind == "sqrt") {
    const auto comma = args.find(',');
    if (comma == std::string_view::npos) throw ConfigError("sqrt schedule needs <c>,<tau>");
    out = StepSchedule::sqrt_horizon(parse_double(args.substr(0, comma), "sqrt c"),
                                     parse_double(args.substr(comma + 1), "sqrt tau"));
  } else {
    throw ConfigError("unknown step schedule kind '" + std::string(kind) + "'");
  }
  if (!(out.scale > 0.0) || !std::isfinite(out.scale)) {
    throw ConfigError("step schedule scale must be positive");
  }
  if (out.kind == StepSchedule::Kind::sqrt_horizon && !(out.horizon >= 1.0)) {
    throw ConfigError("sqrt schedule needs tau >= 1");
  }
  return out;
}

std::string to_string(const StepSchedule& schedule) {
  switch (schedule.kind) {
    case StepSchedule::Kind::constant: return "constant:" + shortest(schedule.scale);
    case StepSchedule::Kind::diminishing: return "diminishing:" + shortest(schedule.scale);
    case StepSchedule::Kind::sqrt_horizon:
      return "sqrt:" + shortest(schedule.scale) + "," + shortest(schedule.horizon);
  }
  return "unknown";
}

void validate(const RunConfig& config, std::size_t n) {
  if (!(config.epochs >= 0.0) || !std::isfinite(config.epochs)) {
    throw ConfigError("epochs must be finite and >= 0");
  }
  if (!(config.schedule.scale > 0.0)) throw ConfigError("step scale must be positive");
  if (config.schedule.kind == StepSchedule::Kind::sqrt_horizon &&
      !(config.schedule.horizon >= 1.0)) {
    throw ConfigError("sqrt schedule needs tau >= 1");
  }
  if (config.memory == 0) throw ConfigError("memory must be positive");
  if (!(config.cautious_eps >= 0.0)) throw ConfigError("cautious eps must be >= 0");
  if (!(config.divergence_factor > 1.0)) throw ConfigError("divergence factor must be > 1");
  if (config.method == Method::serial_sgd) return;
  const auto& s = config.sampling;
  if (s.mode == SamplingMode::fault) {
    if (s.nodes == 0 || s.nodes > n) throw ConfigError("node count must be in [1, n]");
    if (!(s.fail_prob >= 0.0 && s.fail_prob < 1.0)) {
      throw ConfigError("failure probability must be in [0, 1)");
    }
  } else {
    validate_multibatch(n, s.batch_frac, s.overlap_frac, s.mode);
  }
}

std::size_t default_trace_stride(const RunConfig& config, std::size_t n) {
  if (config.method == Method::serial_sgd) return std::max<std::size_t>(n, 1);
  if (config.sampling.mode == SamplingMode::fault) {
    return static_cast<std::size_t>(std::ceil(1.0 / (1.0 - config.sampling.fail_prob) - 1e-9));
  }
  return static_cast<std::size_t>(std::ceil(1.0 / config.sampling.batch_frac - 1e-9));
}

Vector take_step(std::span<const double> w, const LbfgsMemory& mem, std::span<const double> g,
                 double alpha, Method method) {
  Vector p;
  if (method == Method::robust_lbfgs || method == Method::inconsistent_lbfgs) {
    p = mem.direction(g);
  } else {
    p.assign(g.begin(), g.end());
    scale_inplace(-1.0, p);
  }
  Vector next = axpy(alpha, p, w);
  if (!all_finite(next)) {
    std::ostringstream os;
    os << "take_step: non-finite iterate (alpha=" << alpha << ", ||w||=" << norm(w)
       << ", ||g||=" << norm(g) << ", ||p||=" << norm(p) << ", memory=" << mem.size() << ")";
    throw NumericError(os.str());
  }
  return next;
}

std::optional<PairVectors> form_pair(const SamplePlan& plan, const SamplePlan& next_plan,
                                     std::span<const double> w_prev,
                                     std::span<const double> w_next, const Objective& obj,
                                     Method method) {
  PairVectors out;
  out.s = axpy(-1.0, w_prev, w_next);
  if (method == Method::inconsistent_lbfgs) {
    const Vector g_new = obj.eval_subset(w_next, next_plan.batch).gradient;
    const Vector g_old = obj.eval_subset(w_prev, plan.batch).gradient;
    out.y = axpy(-1.0, g_old, g_new);
    return out;
  }
  const IndexSet& overlap = plan.overlap_next;
  if (overlap.empty()) return std::nullopt;
  const Vector g_new = obj.eval_subset(w_next, overlap).gradient;
  const Vector g_old = obj.eval_subset(w_prev, overlap).gradient;
  out.y = axpy(-1.0, g_old, g_new);
  return out;
}

namespace {

// The loop state of a single run. Kept out of the header so run() stays the
// only entry point.
class Runner {
 public:
  Runner(const RunConfig& config, const Objective& obj, const RunHooks& hooks)
      : config_(config),
        obj_(obj),
        hooks_(hooks),
        n_(obj.size()),
        d_(obj.dimension()),
        root_(config.seed),
        sgd_rng_(root_.fork(2)),
        memory_(config.memory, config.scaling, config.cautious_eps) {}

  RunTrace execute();

 private:
  struct BatchEval {
    SubsetGradient batch;
    std::optional<Vector> overlap_prev_grad;  // g^{O_{k-1}}(w_k)
    std::optional<Vector> overlap_next_grad;  // g^{O_k}(w_k)
    std::size_t extra_samples = 0;
  };

  PartialSums accumulate(const IndexSet& idx, EvalPurpose purpose) const {
    if (hooks_.on_eval && !idx.empty()) hooks_.on_eval({k_, purpose, idx});
    return obj_.accumulate(w_, idx);
  }

  BatchEval evaluate(const SamplePlan& plan) const;
  void record(const SamplePlan& plan, const BatchEval& eval, bool pair_accepted, bool done);
  bool lbfgs_method() const {
    return config_.method == Method::robust_lbfgs ||
           config_.method == Method::inconsistent_lbfgs;
  }

  const RunConfig& config_;
  const Objective& obj_;
  const RunHooks& hooks_;
  std::size_t n_;
  std::size_t d_;
  SeededRng root_;
  SeededRng sgd_rng_;
  LbfgsMemory memory_;
  RunTrace trace_;
  Vector w_;
  std::size_t k_ = 0;
  std::size_t stride_ = 1;
  double initial_loss_ = 0.0;
  std::chrono::steady_clock::time_point start_;
};

Runner::BatchEval Runner::evaluate(const SamplePlan& plan) const {
  BatchEval out;
  if (config_.method != Method::robust_lbfgs) {
    out.batch = obj_.finalize(accumulate(plan.batch, EvalPurpose::batch), w_);
    return out;
  }

  // Split S_k into disjoint blocks so that both overlap gradients come out of
  // the same pass that produces g^{S_k}.
  const IndexSet prev_in = set_intersection(plan.overlap_prev, plan.batch);
  const IndexSet extra = set_difference(plan.overlap_prev, plan.batch);
  const IndexSet& next = plan.overlap_next;
  const IndexSet both = set_intersection(prev_in, next);
  const IndexSet prev_only = set_difference(prev_in, next);
  const IndexSet next_only = set_difference(next, prev_in);
  const IndexSet rest = set_difference(set_difference(plan.batch, prev_in), next);

  const PartialSums p_prev = accumulate(prev_only, EvalPurpose::batch);
  const PartialSums p_both = accumulate(both, EvalPurpose::batch);
  const PartialSums p_next = accumulate(next_only, EvalPurpose::batch);
  const PartialSums p_rest = accumulate(rest, EvalPurpose::batch);

  PartialSums total(d_);
  total += p_prev;
  total += p_both;
  total += p_next;
  total += p_rest;
  out.batch = obj_.finalize(total, w_);

  if (!plan.overlap_prev.empty()) {
    PartialSums o(d_);
    o += p_prev;
    o += p_both;
    o += accumulate(extra, EvalPurpose::overlap_extra);
    out.overlap_prev_grad = obj_.finalize(o, w_).gradient;
    out.extra_samples = extra.size();
  }
  if (!next.empty()) {
    PartialSums o(d_);
    o += p_both;
    o += p_next;
    out.overlap_next_grad = obj_.finalize(o, w_).gradient;
  }
  return out;
}

void Runner::record(const SamplePlan& plan, const BatchEval& eval, bool pair_accepted,
                    bool done) {
  if (!done && k_ % stride_ != 0) return;
  if (hooks_.on_eval) {
    const IndexSet all = full_index_set(n_);
    hooks_.on_eval({k_, EvalPurpose::metrology, all});
  }
  const SubsetGradient full = obj_.eval_full(w_);
  TraceRecord rec;
  rec.k = k_;
  rec.epoch = trace_.sample_charges / static_cast<double>(n_);
  rec.grad_norm = norm(full.gradient);
  rec.subset_loss = eval.batch.loss;
  rec.full_loss = full.loss;
  rec.train_acc = obj_.accuracy(w_);
  rec.pair_accepted = pair_accepted;
  rec.sample_size = eval.batch.subset_size;
  rec.overlap_size = config_.method == Method::serial_sgd ? 0 : plan.overlap_prev.size();
  rec.redraws = plan.redraws;
  rec.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  if (trace_.records.empty()) initial_loss_ = full.loss;
  trace_.records.push_back(rec);

  if (trace_.status != RunStatus::completed) return;
  if (full.loss > config_.divergence_factor * std::max(initial_loss_, 1e-300)) {
    trace_.status = RunStatus::diverged;
    trace_.message = "full loss " + std::to_string(full.loss) + " exceeds " +
                     std::to_string(config_.divergence_factor) + "x initial at k=" +
                     std::to_string(k_);
  } else if (config_.grad_tol > 0.0 && rec.grad_norm <= config_.grad_tol) {
    trace_.status = RunStatus::converged;
  }
}

RunTrace Runner::execute() {
  start_ = std::chrono::steady_clock::now();
  validate(config_, n_);
  stride_ = config_.trace_stride > 0 ? config_.trace_stride : default_trace_stride(config_, n_);

  if (config_.initial_point.empty()) {
    w_.assign(d_, 0.0);
  } else {
    if (config_.initial_point.size() != d_) throw UsageError("initial point has wrong length");
    w_ = config_.initial_point;
  }

  std::optional<BatchSampler> sampler;
  if (config_.method != Method::serial_sgd) {
    sampler.emplace(config_.sampling, n_, root_.fork(1));
  }
  auto next_plan = [&]() -> SamplePlan {
    if (sampler) return sampler->next();
    SamplePlan single;
    single.batch = {static_cast<std::size_t>(sgd_rng_.uniform_below(n_))};
    return single;
  };

  Vector w_prev;
  Vector carried_grad;  // g^{O_k}(w_k) (robust) or g^{S_k}(w_k) (inconsistent)
  bool have_carried = false;

  try {
    SamplePlan plan = next_plan();
    for (;;) {
      const bool done =
          trace_.sample_charges >= config_.epochs * static_cast<double>(n_) ||
          (config_.max_iterations > 0 && k_ >= config_.max_iterations);

      const BatchEval eval = evaluate(plan);
      trace_.redraws += plan.redraws;

      bool formed = false;
      bool accepted = false;
      Vector s;
      Vector y;
      if (k_ > 0 && lbfgs_method()) {
        std::optional<Vector> y_new;
        if (config_.method == Method::robust_lbfgs) {
          if (have_carried && eval.overlap_prev_grad) {
            y_new = axpy(-1.0, carried_grad, *eval.overlap_prev_grad);
          }
        } else if (have_carried) {
          y_new = axpy(-1.0, carried_grad, eval.batch.gradient);
        }
        s = axpy(-1.0, w_prev, w_);
        if (y_new && squared_norm(s) > 0.0) {
          y = std::move(*y_new);
          formed = true;
          accepted = memory_.admit(s, y);
          if (accepted) {
            ++trace_.pairs_accepted;
          } else {
            ++trace_.pairs_rejected;
          }
        } else {
          ++trace_.pairs_missing;
          s.clear();
        }
      }

      if (config_.method == Method::robust_lbfgs) {
        have_carried = eval.overlap_next_grad.has_value();
        if (have_carried) carried_grad = *eval.overlap_next_grad;
      } else if (config_.method == Method::inconsistent_lbfgs) {
        carried_grad = eval.batch.gradient;
        have_carried = true;
      }

      if (eval.batch.loss > config_.divergence_factor *
                                std::max(trace_.records.empty() ? eval.batch.loss : initial_loss_,
                                         1e-300)) {
        trace_.status = RunStatus::diverged;
        trace_.message = "subset loss diverged at k=" + std::to_string(k_);
      }

      record(plan, eval, accepted, done || trace_.status != RunStatus::completed);

      if (hooks_.on_iteration) {
        hooks_.on_iteration(
            {k_, w_, plan, memory_, formed, accepted, s, y, eval.batch.gradient});
      }

      if (done || trace_.status != RunStatus::completed) break;

      const double alpha = config_.schedule.alpha(k_);
      Vector w_next = take_step(w_, memory_, eval.batch.gradient, alpha, config_.method);

      trace_.sample_charges += static_cast<double>(eval.batch.subset_size + eval.extra_samples);
      w_prev = std::move(w_);
      w_ = std::move(w_next);
      ++k_;
      plan = next_plan();
    }
  } catch (const NumericError& e) {
    trace_.status = RunStatus::numeric_error;
    trace_.message = "k=" + std::to_string(k_) + ": " + e.what();
  }

  trace_.iterations = k_;
  trace_.final_point = w_;
  return std::move(trace_);
}

}  // namespace

RunTrace run(const RunConfig& config, const Objective& obj, const RunHooks& hooks) {
  Runner runner(config, obj, hooks);
  return runner.execute();
}

}  // namespace mbl
