#include "mbl/experiment.hpp"

#include <charconv>
#include <fstream>
#include <ostream>
#include <sstream>

#include "mbl/errors.hpp"
#include "mbl/libsvm.hpp"

#ifndef MBL_VERSION_STRING
#define MBL_VERSION_STRING "v0.0.0"
#endif

namespace mbl {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  for (;;) {
    const auto pos = s.find(sep);
    const auto part = trim(s.substr(0, pos));
    if (!part.empty()) out.push_back(part);
    if (pos == std::string_view::npos) break;
    s.remove_prefix(pos + 1);
  }
  return out;
}

template <typename T>
T parse_value(std::string_view text, std::string_view key) {
  T v{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
    throw ConfigError("invalid value '" + std::string(text) + "' for " + std::string(key));
  }
  return v;
}

template <typename T>
std::vector<T> parse_list(std::string_view text, std::string_view key) {
  std::vector<T> out;
  for (auto part : split(text, ',')) out.push_back(parse_value<T>(part, key));
  if (out.empty()) throw ConfigError("empty list for " + std::string(key));
  return out;
}

bool parse_bool(std::string_view text, std::string_view key) {
  if (text == "1" || text == "true" || text == "yes" || text == "on") return true;
  if (text == "0" || text == "false" || text == "no" || text == "off") return false;
  throw ConfigError("invalid boolean '" + std::string(text) + "' for " + std::string(key));
}

std::string csv_field(std::string_view text) {
  if (text.find_first_of(",\"\n") == std::string_view::npos) return std::string(text);
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

std::string alpha_token(const StepSchedule& step) {
  switch (step.kind) {
    case StepSchedule::Kind::constant: return format_number(step.scale);
    case StepSchedule::Kind::diminishing: return "dim" + format_number(step.scale);
    case StepSchedule::Kind::sqrt_horizon:
      return "sqrt" + format_number(step.scale) + "x" + format_number(step.horizon);
  }
  return "unknown";
}

}  // namespace

bool ExperimentResult::any_aborted() const {
  for (const auto& c : cells) {
    if (c.status == RunStatus::diverged || c.status == RunStatus::numeric_error) return true;
  }
  return false;
}

std::string_view version_string() { return MBL_VERSION_STRING; }

std::string format_number(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) return "nan";
  return std::string(buf, ptr);
}

std::string cell_file_name(Method method, double batch_frac, double overlap_frac,
                           const StepSchedule& step, double fail_prob, std::uint64_t seed) {
  std::string name(to_string(method));
  name += "_r" + format_number(batch_frac);
  name += "_o" + format_number(overlap_frac);
  name += "_a" + alpha_token(step);
  name += "_p" + format_number(fail_prob);
  name += "_s" + std::to_string(seed);
  return name + ".csv";
}

void write_trace_csv(std::ostream& out, const RunTrace& trace) {
  out << kTraceCsvHeader << '\n';
  for (const auto& r : trace.records) {
    out << r.k << ',' << format_number(r.epoch) << ',' << format_number(r.grad_norm) << ','
        << format_number(r.subset_loss) << ',' << format_number(r.full_loss) << ','
        << format_number(r.train_acc) << ',' << (r.pair_accepted ? 1 : 0) << ','
        << r.sample_size << ',' << r.overlap_size << ',' << r.redraws << '\n';
  }
}

std::vector<RunConfig> expand_grid(const ExperimentSpec& spec) {
  if (spec.methods.empty() || spec.batch_fracs.empty() || spec.overlap_fracs.empty() ||
      spec.steps.empty() || spec.fail_probs.empty() || spec.seeds.empty()) {
    throw ConfigError("experiment grid is empty");
  }
  std::vector<RunConfig> cells;
  for (Method m : spec.methods) {
    for (double r : spec.batch_fracs) {
      for (double o : spec.overlap_fracs) {
        for (const auto& step : spec.steps) {
          for (double p : spec.fail_probs) {
            for (std::uint64_t seed : spec.seeds) {
              RunConfig c = spec.base;
              c.method = m;
              c.sampling.batch_frac = r;
              c.sampling.overlap_frac = o;
              c.sampling.fail_prob = p;
              c.schedule = step;
              c.seed = seed;
              cells.push_back(std::move(c));
            }
          }
        }
      }
    }
  }
  return cells;
}

Dataset load_dataset(const ExperimentSpec& spec) {
  if (spec.synthetic) return make_synthetic(*spec.synthetic);
  if (spec.dataset.empty()) throw ConfigError("no dataset: give --dataset or --synthetic");
  return parse_libsvm(spec.dataset, spec.dimension_override);
}

Objective make_objective(const ExperimentSpec& spec, std::shared_ptr<const Dataset> data) {
  const double sigma = spec.sigma.value_or(1.0 / static_cast<double>(data->size()));
  return Objective(spec.objective, std::move(data), sigma);
}

ExperimentResult run_experiment(const ExperimentSpec& spec) {
  auto data = std::make_shared<const Dataset>(load_dataset(spec));
  return run_experiment(spec, make_objective(spec, std::move(data)));
}

ExperimentResult run_experiment(const ExperimentSpec& spec, const Objective& obj) {
  const std::vector<RunConfig> cells = expand_grid(spec);
  for (const auto& c : cells) validate(c, obj.size());

  std::error_code ec;
  std::filesystem::create_directories(spec.out_dir, ec);
  if (ec) {
    throw ConfigError("cannot create output directory " + spec.out_dir.string() + ": " +
                      ec.message());
  }

  ExperimentResult result;
  for (const RunConfig& config : cells) {
    CellResult cell;
    cell.config = config;
    cell.file = cell_file_name(config.method, config.sampling.batch_frac,
                               config.sampling.overlap_frac, config.schedule,
                               config.sampling.fail_prob, config.seed);
    const RunTrace trace = run(config, obj);
    cell.status = trace.status;
    cell.message = trace.message;
    cell.iterations = trace.iterations;
    cell.final_grad_norm = trace.records.empty() ? 0.0 : trace.records.back().grad_norm;

    std::ofstream out(spec.out_dir / cell.file, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + (spec.out_dir / cell.file).string());
    write_trace_csv(out, trace);
    result.cells.push_back(std::move(cell));
  }

  result.manifest = spec.out_dir / "manifest.csv";
  std::ofstream man(result.manifest, std::ios::binary);
  if (!man) throw ConfigError("cannot write " + result.manifest.string());
  man << kManifestHeader << '\n';
  for (const auto& c : result.cells) {
    man << c.file << ',' << to_string(c.config.method) << ','
        << to_string(c.config.sampling.mode) << ',' << format_number(c.config.sampling.batch_frac)
        << ',' << format_number(c.config.sampling.overlap_frac) << ','
        << csv_field(to_string(c.config.schedule)) << ','
        << format_number(c.config.sampling.fail_prob) << ',' << c.config.seed << ','
        << to_string(c.status) << ',' << c.iterations << ',' << format_number(c.final_grad_norm)
        << ',' << version_string() << ',' << csv_field(c.message) << '\n';
  }
  return result;
}

void apply_option(ExperimentSpec& spec, std::string_view key, std::string_view value) {
  value = trim(value);
  if (key == "dataset") {
    spec.dataset = std::string(value);
  } else if (key == "synthetic") {
    const auto parts = split(value, ',');
    if (parts.size() != 4) throw ConfigError("synthetic expects n,d,nnz,margin");
    SyntheticSpec s = spec.synthetic.value_or(SyntheticSpec{});
    s.n = parse_value<std::size_t>(parts[0], key);
    s.d = parse_value<std::size_t>(parts[1], key);
    s.nnz_per_row = parse_value<std::size_t>(parts[2], key);
    s.margin = parse_value<double>(parts[3], key);
    spec.synthetic = s;
  } else if (key == "data-seed") {
    SyntheticSpec s = spec.synthetic.value_or(SyntheticSpec{});
    s.seed = parse_value<std::uint64_t>(value, key);
    spec.synthetic = s;
  } else if (key == "dimension") {
    spec.dimension_override = parse_value<std::size_t>(value, key);
  } else if (key == "objective") {
    spec.objective = parse_objective_kind(value);
  } else if (key == "sigma") {
    spec.sigma = parse_value<double>(value, key);
  } else if (key == "method") {
    spec.methods.clear();
    for (auto part : split(value, ',')) spec.methods.push_back(parse_method(part));
    if (spec.methods.empty()) throw ConfigError("empty method list");
  } else if (key == "batch-frac") {
    spec.batch_fracs = parse_list<double>(value, key);
  } else if (key == "overlap-frac") {
    spec.overlap_fracs = parse_list<double>(value, key);
  } else if (key == "strategy") {
    spec.base.sampling.mode = parse_sampling_mode(value);
  } else if (key == "nodes") {
    spec.base.sampling.nodes = parse_value<std::size_t>(value, key);
  } else if (key == "fail-prob") {
    spec.fail_probs = parse_list<double>(value, key);
  } else if (key == "reshard") {
    spec.base.sampling.reshard_each_epoch = parse_bool(value, key);
  } else if (key == "memory") {
    spec.base.memory = parse_value<std::size_t>(value, key);
  } else if (key == "cautious-eps") {
    spec.base.cautious_eps = parse_value<double>(value, key);
  } else if (key == "scaling") {
    if (value == "bb") {
      spec.base.scaling = ScalingPolicy::bb();
    } else if (value.starts_with("fixed:")) {
      spec.base.scaling = ScalingPolicy::fixed(parse_value<double>(value.substr(6), key));
    } else {
      throw ConfigError("scaling must be bb or fixed:<gamma>");
    }
  } else if (key == "step") {
    spec.steps.clear();
    for (auto part : split(value, ';')) spec.steps.push_back(parse_step_schedule(part));
    if (spec.steps.empty()) throw ConfigError("empty step list");
  } else if (key == "epochs") {
    spec.base.epochs = parse_value<double>(value, key);
  } else if (key == "seed") {
    spec.seeds = parse_list<std::uint64_t>(value, key);
  } else if (key == "trace-stride") {
    spec.base.trace_stride = parse_value<std::size_t>(value, key);
  } else if (key == "out") {
    spec.out_dir = std::string(value);
  } else {
    throw ConfigError("unknown option '" + std::string(key) + "'");
  }
}

void apply_config_file(ExperimentSpec& spec, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line(raw);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": expected key=value");
    }
    try {
      apply_option(spec, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

}  // namespace mbl
