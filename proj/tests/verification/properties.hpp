#pragma once

// Property suites that tie runs of the optimizer to the behaviour the
// convergence results predict. Each check returns an OracleReport with the
// raw numbers it judged, so failures can be replayed by seed.

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "mbl/driver.hpp"
#include "mbl/lbfgs.hpp"
#include "mbl/objective.hpp"

namespace mbl::verify {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

struct OracleReport {
  std::string id;
  std::size_t trials = 0;
  double max_violation = 0.0;
  bool passed = true;
  std::vector<std::uint64_t> failing_seeds;
  std::string detail;  // one-line summary of the measured quantities
  CsvTable table;

  // Marks the report failed and remembers the seed that shows it.
  void fail(std::uint64_t seed);
};

/// n=5000, d=20 dense synthetic logistic data (margin 0.1, data seed 1)
/// with sigma = 1/n.
Objective desk_problem(ObjectiveKind kind = ObjectiveKind::logistic_l2);

/// Lowest loss of a full-batch L-BFGS run (r = 1, alpha = 1) stopped at
/// ||grad F|| <= 1e-10 or 500 iterations.
double reference_optimum(const Objective& obj);

/// H y_new = s_new for the newest pair, relative to ||s_new||. An empty
/// memory passes trivially.
OracleReport check_secant(const LbfgsMemory& mem, std::size_t dimension, double tol = 1e-10);

/// Final trace value treated as +inf for aborted runs.
double final_grad_norm(const RunTrace& trace);

/// Median ||grad F|| over the records of epoch window [e, e + 1).
double epoch_median(const RunTrace& trace, double e);

struct ConstantStepSetup {
  RunConfig base;                    // method, sampling, eps
  std::vector<double> alphas;        // decreasing halving grid
  std::vector<std::uint64_t> seeds;
  double band = 2.0;                 // plateau: last/prev epoch within this factor
};

/// Plateau per alpha (last-epoch median within `band` of the previous
/// epoch, medians over seeds) and plateau medians nonincreasing as alpha
/// decreases.
OracleReport check_theorem_constant_step(const Objective& obj, const ConstantStepSetup& setup);

struct DiminishingSetup {
  RunConfig base;
  double beta = 1.0;
  std::size_t k_first = 10;
  std::size_t k_last = 1000;
  std::vector<std::uint64_t> seeds;
  double max_slope = -0.6;
};

/// Mean over seeds of F(w_k) - F*, fitted on log-log axes over
/// [k_first, k_last]; passes when the slope is <= max_slope.
OracleReport check_theorem_diminishing(const Objective& obj, double f_star,
                                       const DiminishingSetup& setup);

struct NonconvexSetup {
  RunConfig base;  // sigmoid_lsq run with eps > 0
  std::vector<std::uint64_t> seeds;
};

/// Running average of ||grad F||^2 settles (its last increase happens in
/// the first half of the run), every value is finite, every stored pair
/// satisfies eps ||s||^2 <= y.s <= ||y|| ||s||, and the dense Hessian
/// approximation stays positive definite.
OracleReport check_nonconvex_bounded(const Objective& obj, const NonconvexSetup& setup);

struct FaultSetup {
  RunConfig base;  // fault mode, B nodes, constant step
  std::vector<double> fail_probs;
  std::vector<std::uint64_t> seeds;
  double band = 10.0;
};

/// Robust medians across the p grid within `band` of each other, and robust
/// median <= inconsistent median at the largest p.
OracleReport check_fault_robustness(const Objective& obj, const FaultSetup& setup);

struct StabilitySetup {
  RunConfig base;  // strategy 1, small r, large constant step
  std::vector<std::uint64_t> seeds;
  double blowup_factor = 10.0;
  std::size_t min_unstable = 3;
};

/// Robust median final ||grad F|| below the inconsistent median, and the
/// inconsistent variant aborting or ending blowup_factor above the robust
/// median in at least min_unstable seeds.
OracleReport check_overlap_stability(const Objective& obj, const StabilitySetup& setup);

/// Writes summary.txt (one line per report) and <id>.csv per report.
void write_reports(const std::filesystem::path& dir, const std::vector<OracleReport>& reports);

}  // namespace mbl::verify
