#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mbl/driver.hpp"
#include "mbl/objective.hpp"
#include "mbl/synthetic.hpp"

namespace mbl {

inline constexpr std::string_view kTraceCsvHeader =
    "k,epoch,grad_norm,subset_loss,full_loss,train_acc,pair_accepted,sample_size,overlap_size,"
    "redraws";

inline constexpr std::string_view kManifestHeader =
    "file,method,strategy,batch_frac,overlap_frac,step,fail_prob,seed,status,iterations,"
    "final_grad_norm,version,message";

inline constexpr std::string_view kOutDirEnv = "MBL_OUT_DIR";

/// A parameter sweep: every combination of the list fields is one cell.
struct ExperimentSpec {
  std::filesystem::path dataset;          // LIBSVM file, or empty with `synthetic`
  std::optional<SyntheticSpec> synthetic;
  std::size_t dimension_override = 0;
  ObjectiveKind objective = ObjectiveKind::logistic_l2;
  std::optional<double> sigma;  // default 1/n

  std::vector<Method> methods{Method::robust_lbfgs};
  std::vector<double> batch_fracs{0.05};
  std::vector<double> overlap_fracs{0.2};
  std::vector<StepSchedule> steps{StepSchedule::constant(1.0), StepSchedule::constant(0.1)};
  std::vector<double> fail_probs{0.0};
  std::vector<std::uint64_t> seeds{1};

  RunConfig base;  // everything not swept; nodes default 16
  std::filesystem::path out_dir = "mbl_out";
};

struct CellResult {
  std::string file;
  RunConfig config;
  RunStatus status = RunStatus::completed;
  std::size_t iterations = 0;
  double final_grad_norm = 0.0;
  std::string message;
};

struct ExperimentResult {
  std::vector<CellResult> cells;
  std::filesystem::path manifest;

  bool any_aborted() const;
};

/// Version recorded in manifests ("v<major>.<minor>.<patch>[-g<describe>]").
std::string_view version_string();

/// <method>_r<r>_o<o>_a<alpha>_p<p>_s<seed>.csv. Non-constant schedules
/// render alpha as dim<beta> or sqrt<c>x<tau>.
std::string cell_file_name(Method method, double batch_frac, double overlap_frac,
                           const StepSchedule& step, double fail_prob, std::uint64_t seed);

/// Formats a double as the shortest text that reads back to the same value.
std::string format_number(double v);

void write_trace_csv(std::ostream& out, const RunTrace& trace);

/// Every cell's RunConfig in grid order (method, r, o, step, p, seed).
std::vector<RunConfig> expand_grid(const ExperimentSpec& spec);

/// Loads the dataset named by the spec (file or synthetic).
Dataset load_dataset(const ExperimentSpec& spec);

Objective make_objective(const ExperimentSpec& spec, std::shared_ptr<const Dataset> data);

/// Runs every cell, writing one CSV per cell plus manifest.csv into
/// spec.out_dir. Aborted cells are recorded and the sweep continues.
/// Throws ConfigError before running anything when a cell is invalid.
ExperimentResult run_experiment(const ExperimentSpec& spec);
ExperimentResult run_experiment(const ExperimentSpec& spec, const Objective& obj);

/// Applies one `key=value` setting, using the long flag names without the
/// leading dashes (batch-frac, step, seed, ...). List-valued keys accept
/// comma-separated values; `step` uses ';' because sqrt:<c>,<tau> contains a
/// comma. Throws ConfigError on an unknown key or bad value.
void apply_option(ExperimentSpec& spec, std::string_view key, std::string_view value);

/// Reads `key=value` lines ('#' comments, blank lines ignored) and applies
/// them in order.
void apply_config_file(ExperimentSpec& spec, const std::filesystem::path& path);

}  // namespace mbl
