#include <gtest/gtest.h>

#include <cfloat>
#include <cmath>
#include <map>
#include <memory>
#include <set>

#include "mbl/driver.hpp"
#include "mbl/errors.hpp"
#include "mbl/synthetic.hpp"

namespace mbl {
namespace {

Objective logistic_problem(std::size_t n = 400, std::size_t d = 8, std::uint64_t seed = 3) {
  auto data = std::make_shared<const Dataset>(make_synthetic({n, d, d, 0.1, seed}));
  return Objective(ObjectiveKind::logistic_l2, data, 1.0 / static_cast<double>(n));
}

RunConfig base_config(Method method, SamplingMode mode = SamplingMode::strategy1) {
  RunConfig c;
  c.method = method;
  c.sampling.mode = mode;
  c.sampling.batch_frac = 0.1;
  c.sampling.overlap_frac = 0.2;
  c.schedule = StepSchedule::constant(0.5);
  c.epochs = 3.0;
  c.seed = 11;
  c.trace_stride = 1;
  return c;
}

double rel_diff(std::span<const double> a, std::span<const double> b) {
  return norm(axpy(-1.0, b, a)) / std::max(norm(b), 1e-300);
}

TEST(Schedule, Values) {
  EXPECT_EQ(StepSchedule::constant(0.3).alpha(7), 0.3);
  EXPECT_DOUBLE_EQ(StepSchedule::diminishing(2.0).alpha(0), 2.0);
  EXPECT_DOUBLE_EQ(StepSchedule::diminishing(2.0).alpha(3), 0.5);
  EXPECT_DOUBLE_EQ(StepSchedule::sqrt_horizon(1.0, 100.0).alpha(50), 0.1);
  EXPECT_EQ(schedule_alpha(StepSchedule::constant(4.0), 0), 4.0);
}

TEST(Schedule, ParseRoundTrip) {
  for (const auto& s : {StepSchedule::constant(0.1), StepSchedule::diminishing(2.5),
                        StepSchedule::sqrt_horizon(0.5, 1000.0)}) {
    EXPECT_EQ(parse_step_schedule(to_string(s)), s) << to_string(s);
  }
  EXPECT_EQ(to_string(StepSchedule::constant(0.1)), "constant:0.1");
  EXPECT_THROW(parse_step_schedule("linear:1"), ConfigError);
  EXPECT_THROW(parse_step_schedule("constant:x"), ConfigError);
  EXPECT_THROW(parse_step_schedule("sqrt:1"), ConfigError);
}

TEST(Method, ParseRoundTrip) {
  for (Method m : {Method::robust_lbfgs, Method::inconsistent_lbfgs, Method::multibatch_gd,
                   Method::serial_sgd}) {
    EXPECT_EQ(parse_method(to_string(m)), m);
  }
  EXPECT_THROW(parse_method("adam"), ConfigError);
}

TEST(TakeStep, GradientMethodsUseNegativeGradient) {
  LbfgsMemory mem;
  mem.admit(Vector{1, 0}, Vector{4, 0});
  EXPECT_EQ(take_step(Vector{1, 1}, mem, Vector{2, -2}, 0.5, Method::multibatch_gd),
            (Vector{0, 2}));
  // The quasi-Newton step applies H = diag(1/4, 1/4) here.
  EXPECT_EQ(take_step(Vector{1, 1}, mem, Vector{2, -2}, 1.0), (Vector{0.5, 1.5}));
  EXPECT_THROW(take_step(Vector{1, 1}, mem, Vector{DBL_MAX, 0}, 1e10, Method::multibatch_gd),
               NumericError);
}

TEST(Validate, RejectsBadConfigurations) {
  RunConfig c = base_config(Method::robust_lbfgs);
  EXPECT_NO_THROW(validate(c, 400));
  c.sampling.overlap_frac = 0.6;
  EXPECT_THROW(validate(c, 400), ConfigError);
  c = base_config(Method::robust_lbfgs, SamplingMode::fault);
  c.sampling.fail_prob = 1.0;
  EXPECT_THROW(validate(c, 400), ConfigError);
  c = base_config(Method::robust_lbfgs);
  c.epochs = -1;
  EXPECT_THROW(validate(c, 400), ConfigError);
  c = base_config(Method::robust_lbfgs);
  c.schedule.scale = 0.0;
  EXPECT_THROW(validate(c, 400), ConfigError);
}

// Every pair the driver admits matches a fresh evaluation of its definition.
class PairFormation : public ::testing::TestWithParam<std::pair<Method, SamplingMode>> {};

TEST_P(PairFormation, DriverPairMatchesReferenceConstruction) {
  const auto [method, mode] = GetParam();
  const Objective obj = logistic_problem();
  RunConfig config = base_config(method, mode);
  if (mode == SamplingMode::fault) {
    config.sampling.fail_prob = 0.5;
    config.epochs = 30;
  }
  Vector prev_w;
  std::optional<SamplePlan> prev_plan;
  std::size_t checked = 0;
  RunHooks hooks;
  hooks.on_iteration = [&](const IterationEvent& ev) {
    if (ev.pair_formed) {
      ASSERT_TRUE(prev_plan.has_value());
      const auto ref = form_pair(*prev_plan, ev.plan, prev_w, ev.w, obj, method);
      ASSERT_TRUE(ref.has_value());
      EXPECT_EQ(Vector(ev.s.begin(), ev.s.end()), ref->s);
      EXPECT_LE(rel_diff(ev.y, ref->y), 1e-12) << "k=" << ev.k;
      ++checked;
    }
    prev_w.assign(ev.w.begin(), ev.w.end());
    prev_plan = ev.plan;
  };
  const RunTrace trace = run(config, obj, hooks);
  EXPECT_EQ(trace.status, RunStatus::completed);
  EXPECT_GT(checked, 20u);
  EXPECT_EQ(checked, trace.pairs_accepted + trace.pairs_rejected);
}

std::string pair_case_name(
    const ::testing::TestParamInfo<std::pair<Method, SamplingMode>>& info) {
  return std::string(to_string(info.param.first)) + "_" +
         std::string(to_string(info.param.second));
}

INSTANTIATE_TEST_SUITE_P(
    Methods, PairFormation,
    ::testing::Values(std::pair{Method::robust_lbfgs, SamplingMode::strategy1},
                      std::pair{Method::robust_lbfgs, SamplingMode::strategy2},
                      std::pair{Method::robust_lbfgs, SamplingMode::fault},
                      std::pair{Method::inconsistent_lbfgs, SamplingMode::strategy1}),
    pair_case_name);

TEST(Run, ZeroEpochsRecordsOnlyTheStart) {
  const Objective obj = logistic_problem();
  RunConfig c = base_config(Method::robust_lbfgs);
  c.epochs = 0.0;
  const RunTrace trace = run(c, obj);
  ASSERT_EQ(trace.records.size(), 1u);
  EXPECT_EQ(trace.iterations, 0u);
  EXPECT_NEAR(trace.records[0].full_loss, std::log(2.0), 1e-14);
  EXPECT_EQ(trace.final_point, Vector(8, 0.0));
}

TEST(Run, ReplayIsBitIdentical) {
  const Objective obj = logistic_problem();
  for (auto mode : {SamplingMode::strategy1, SamplingMode::strategy2, SamplingMode::fault}) {
    RunConfig c = base_config(Method::robust_lbfgs, mode);
    c.sampling.fail_prob = 0.3;
    const RunTrace a = run(c, obj);
    const RunTrace b = run(c, obj);
    ASSERT_EQ(a.records.size(), b.records.size());
    for (std::size_t i = 0; i < a.records.size(); ++i) {
      EXPECT_EQ(a.records[i].grad_norm, b.records[i].grad_norm);
      EXPECT_EQ(a.records[i].full_loss, b.records[i].full_loss);
    }
    EXPECT_EQ(a.final_point, b.final_point);
    c.seed += 1;
    EXPECT_NE(run(c, obj).final_point, a.final_point);
  }
}

TEST(Run, GradientDescentOnQuadraticDescendsMonotonically) {
  auto data = std::make_shared<const Dataset>(make_synthetic({200, 4, 4, 0.0, 5}));
  const Objective obj = Objective::quadratic(data, 0.0, {1.0, 2.0, 4.0, 8.0});
  RunConfig c = base_config(Method::multibatch_gd, SamplingMode::fault);
  c.sampling.fail_prob = 0.0;  // every node answers: full batch
  c.schedule = StepSchedule::constant(0.125);  // 1 / largest curvature
  c.epochs = 200;
  c.initial_point = {3.0, -2.0, 1.0, 4.0};
  const RunTrace trace = run(c, obj);
  ASSERT_EQ(trace.records.size(), 201u);
  for (std::size_t i = 1; i < trace.records.size(); ++i) {
    // Slack for roundoff once the loss has settled at the minimum.
    const double prev = trace.records[i - 1].full_loss;
    EXPECT_LE(trace.records[i].full_loss, prev * (1 + 1e-14)) << "k=" << i;
  }
  EXPECT_LT(trace.records.back().grad_norm, 1e-8);
}

// Exact curvature pairs on a full batch: L-BFGS reaches the minimizer in a
// handful of steps.
TEST(Run, FullBatchLbfgsSolvesQuadratic) {
  auto data = std::make_shared<const Dataset>(make_synthetic({200, 4, 4, 0.0, 5}));
  const Objective obj = Objective::quadratic(data, 0.0, {1.0, 2.0, 4.0, 8.0});
  RunConfig c = base_config(Method::robust_lbfgs, SamplingMode::fault);
  c.sampling.fail_prob = 0.0;
  c.schedule = StepSchedule::constant(1.0);
  c.epochs = 30;
  c.cautious_eps = 0.0;
  c.initial_point = {3.0, -2.0, 1.0, 4.0};
  const RunTrace trace = run(c, obj);
  EXPECT_LT(trace.records.back().grad_norm, 1e-10);
}

// Each example is evaluated once per iterate for the batch (overlap
// gradients are assembled from the same partial sums).
TEST(Run, NoIndexEvaluatedTwicePerIterate) {
  const Objective obj = logistic_problem();
  for (auto mode : {SamplingMode::strategy1, SamplingMode::strategy2, SamplingMode::fault}) {
    std::map<std::size_t, std::multiset<std::size_t>> seen;
    RunHooks hooks;
    hooks.on_eval = [&](const EvalEvent& ev) {
      if (ev.purpose == EvalPurpose::metrology) return;
      seen[ev.iterate].insert(ev.indices.begin(), ev.indices.end());
    };
    RunConfig c = base_config(Method::robust_lbfgs, mode);
    c.sampling.fail_prob = 0.2;
    run(c, obj, hooks);
    ASSERT_FALSE(seen.empty());
    for (const auto& [k, idx] : seen) {
      const std::set<std::size_t> unique(idx.begin(), idx.end());
      EXPECT_EQ(unique.size(), idx.size()) << to_string(mode) << " k=" << k;
    }
  }
}

TEST(Run, EpochCountsChargedSamples) {
  const Objective obj = logistic_problem();
  for (auto mode : {SamplingMode::strategy1, SamplingMode::strategy2}) {
    std::map<std::size_t, std::size_t> charged;
    std::size_t extra = 0;
    RunHooks hooks;
    hooks.on_eval = [&](const EvalEvent& ev) {
      if (ev.purpose == EvalPurpose::metrology) return;
      charged[ev.iterate] += ev.indices.size();
      if (ev.purpose == EvalPurpose::overlap_extra) extra += ev.indices.size();
    };
    const RunTrace trace = run(base_config(Method::robust_lbfgs, mode), obj, hooks);
    double total = 0.0;
    for (const auto& rec : trace.records) {
      EXPECT_DOUBLE_EQ(rec.epoch, total / 400.0) << to_string(mode) << " k=" << rec.k;
      total += static_cast<double>(charged[rec.k]);
    }
    EXPECT_GE(trace.sample_charges, 3.0 * 400);
    if (mode == SamplingMode::strategy2) {
      EXPECT_GT(extra, 0u);
    } else {
      EXPECT_EQ(extra, 0u);
    }
  }
}

TEST(Run, RobustAndInconsistentPairsDiffer) {
  const Objective obj = logistic_problem();
  const RunTrace robust = run(base_config(Method::robust_lbfgs), obj);
  const RunTrace inconsistent = run(base_config(Method::inconsistent_lbfgs), obj);
  EXPECT_NE(robust.final_point, inconsistent.final_point);
}

// With a full batch every step the two pair definitions coincide.
TEST(Run, FullBatchFaultModeMakesVariantsAgree) {
  const Objective obj = logistic_problem();
  RunConfig c = base_config(Method::robust_lbfgs, SamplingMode::fault);
  c.sampling.fail_prob = 0.0;
  c.epochs = 15;
  const RunTrace robust = run(c, obj);
  c.method = Method::inconsistent_lbfgs;
  const RunTrace inconsistent = run(c, obj);
  ASSERT_EQ(robust.records.size(), inconsistent.records.size());
  EXPECT_LE(rel_diff(robust.final_point, inconsistent.final_point), 1e-12);
  EXPECT_EQ(robust.pairs_accepted, inconsistent.pairs_accepted);
}

TEST(Run, SerialSgdTakesOneExamplePerIteration) {
  const Objective obj = logistic_problem();
  RunConfig c = base_config(Method::serial_sgd);
  c.schedule = StepSchedule::constant(0.05);
  c.epochs = 2;
  c.trace_stride = 0;
  const RunTrace trace = run(c, obj);
  EXPECT_EQ(trace.iterations, 800u);
  EXPECT_EQ(trace.records.size(), 3u);
  EXPECT_EQ(trace.records[1].sample_size, 1u);
  EXPECT_EQ(trace.pairs_accepted, 0u);
}

TEST(Run, DivergenceIsReported) {
  const Objective obj = logistic_problem();
  RunConfig c = base_config(Method::multibatch_gd);
  c.schedule = StepSchedule::constant(1e9);
  const RunTrace trace = run(c, obj);
  EXPECT_EQ(trace.status, RunStatus::diverged);
  EXPECT_TRUE(trace.aborted());
  EXPECT_FALSE(trace.message.empty());
}

TEST(Run, OverflowIsANumericError) {
  auto data = std::make_shared<const Dataset>(make_synthetic({50, 2, 2, 0.0, 5}));
  const Objective obj = Objective::quadratic(data, 0.0);
  RunConfig c = base_config(Method::multibatch_gd, SamplingMode::fault);
  c.sampling.nodes = 5;
  c.schedule = StepSchedule::constant(3.0);  // |1 - alpha| = 2: doubles every step
  c.epochs = 5000;
  c.divergence_factor = DBL_MAX;
  c.initial_point = {10.0, 10.0};
  const RunTrace trace = run(c, obj);
  EXPECT_EQ(trace.status, RunStatus::numeric_error);
  EXPECT_FALSE(trace.message.empty());
  EXPECT_FALSE(trace.records.empty());
}

TEST(Run, GradTolStopsEarly) {
  const Objective obj = logistic_problem();
  RunConfig c = base_config(Method::robust_lbfgs, SamplingMode::fault);
  c.grad_tol = 1e-3;
  c.epochs = 100;
  const RunTrace trace = run(c, obj);
  EXPECT_EQ(trace.status, RunStatus::converged);
  EXPECT_LE(trace.records.back().grad_norm, 1e-3);
}

}  // namespace
}  // namespace mbl
