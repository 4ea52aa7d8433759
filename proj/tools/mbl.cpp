// mbl: run multi-batch L-BFGS experiment grids and write CSV traces.
//
// Exit codes: 0 success, 1 usage/configuration error, 2 data error,
// 3 at least one cell aborted (divergence or numeric failure).

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "mbl/errors.hpp"
#include "mbl/experiment.hpp"
#include "mbl/libsvm.hpp"

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

bool out_given_on_command_line(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) {
    const std::string_view arg(argv[i]);
    if (arg == "--out" || arg.starts_with("--out=")) return true;
  }
  return false;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-batch L-BFGS experiment runner"};
  app.set_version_flag("--version", std::string(mbl::version_string()));

  // Keys double as config-file keys (without the dashes).
  const std::vector<std::pair<std::string, std::string>> flags = {
      {"dataset", "LIBSVM training file"},
      {"synthetic", "generate data instead: n,d,nnz,margin"},
      {"data-seed", "seed for --synthetic"},
      {"dimension", "feature dimension override for --dataset"},
      {"objective", "logistic_l2 | sigmoid_lsq | quadratic"},
      {"sigma", "L2 regularization (default 1/n)"},
      {"method", "comma list of robust_lbfgs, inconsistent_lbfgs, multibatch_gd, serial_sgd"},
      {"batch-frac", "comma list of batch fractions r"},
      {"overlap-frac", "comma list of overlap fractions o"},
      {"strategy", "1 | 2 | fault"},
      {"nodes", "simulated node count B (fault mode)"},
      {"fail-prob", "comma list of node failure probabilities p"},
      {"reshard", "reshuffle shards every epoch (fault mode): true|false"},
      {"memory", "L-BFGS memory m"},
      {"cautious-eps", "skip pairs with y.s < eps ||s||^2"},
      {"scaling", "bb | fixed:<gamma>"},
      {"step", "';'-separated list of constant:<a> | diminishing:<b> | sqrt:<c>,<tau>"},
      {"epochs", "passes of gradient work per cell"},
      {"seed", "comma list of run seeds"},
      {"trace-stride", "iterations between full-gradient records (0 = once per epoch)"},
      {"out", "output directory (env MBL_OUT_DIR overrides unless --out is given)"},
  };

  std::map<std::string, std::string> values;
  for (const auto& [key, help] : flags) {
    app.add_option("--" + key, values[key], help);
  }
  std::string config_file;
  app.add_option("--config", config_file, "key=value file; command-line flags override it")
      ->check(CLI::ExistingFile);
  std::string write_dataset;
  app.add_option("--write-dataset", write_dataset,
                 "write the loaded dataset in LIBSVM format and exit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  mbl::ExperimentSpec spec;
  spec.base.sampling.nodes = 16;
  try {
    if (!config_file.empty()) mbl::apply_config_file(spec, config_file);
    for (const auto& [key, help] : flags) {
      if (app.count("--" + key) > 0) mbl::apply_option(spec, key, values[key]);
    }
    if (!out_given_on_command_line(argc, argv)) {
      if (const char* env = std::getenv(mbl::kOutDirEnv.data()); env && *env) {
        spec.out_dir = env;
      }
    }

    if (!write_dataset.empty()) {
      const mbl::Dataset data = mbl::load_dataset(spec);
      std::ofstream out(write_dataset, std::ios::binary);
      if (!out) throw mbl::ConfigError("cannot write " + write_dataset);
      mbl::write_libsvm(out, data);
      std::cout << "wrote " << data.size() << " examples (d=" << data.dimension() << ") to "
                << write_dataset << "\n";
      return 0;
    }

    const mbl::ExperimentResult result = mbl::run_experiment(spec);
    std::size_t aborted = 0;
    for (const auto& cell : result.cells) {
      const bool bad = cell.status == mbl::RunStatus::diverged ||
                       cell.status == mbl::RunStatus::numeric_error;
      aborted += bad ? 1 : 0;
      std::cout << cell.file << "  " << mbl::to_string(cell.status) << "  iters=" << cell.iterations
                << "  ||grad F||=" << cell.final_grad_norm;
      if (!cell.message.empty()) std::cout << "  (" << cell.message << ")";
      std::cout << "\n";
    }
    std::cout << result.cells.size() << " cells, " << aborted << " aborted; manifest "
              << result.manifest.string() << "\n";
    return result.any_aborted() ? kExitNumeric : 0;
  } catch (const mbl::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const mbl::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const mbl::UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const mbl::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return kExitNumeric;
  }
}
