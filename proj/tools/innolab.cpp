#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "innolab/harness/config.hpp"
#include "innolab/harness/records.hpp"
#include "innolab/harness/report.hpp"
#include "innolab/harness/suite.hpp"
#include "innolab/models/builtin.hpp"

namespace {

int run_command(const std::string& config_path, const std::optional<std::uint64_t>& seed,
                const std::optional<std::size_t>& paths, const std::optional<std::size_t>& grid,
                const std::optional<std::size_t>& workers) {
  innolab::ExperimentConfig cfg = innolab::load_config(config_path);
  if (seed) {
    cfg.seed = *seed;
  }
  if (paths) {
    cfg.paths = *paths;
  }
  if (grid) {
    cfg.steps = *grid;
  }
  if (workers) {
    cfg.workers = *workers;
  }
  const auto dir = innolab::output_directory(cfg);
  const auto result = innolab::run_and_write(cfg, dir);
  innolab::print_table(innolab::read_results(dir / "results.csv"), std::cout);
  std::cout << "verdict: " << innolab::to_string(result.verdict.verdict) << "\n";
  for (const auto& f : result.failures) {
    std::cerr << "threshold violated: " << f << "\n";
  }
  return result.failures.empty() ? 0 : 1;
}

void list_models() {
  for (const auto& m : innolab::list_models()) {
    std::cout << m.name << " (" << innolab::to_string(m.kind) << "): " << m.summary << "\n";
    for (const auto& p : m.parameters) {
      std::cout << "    model." << p.name << " = " << p.fallback << "    " << p.meaning << "\n";
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Innovation-filtration criterion experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> paths;
  std::optional<std::size_t> grid;
  std::optional<std::size_t> workers;
  auto* run = app.add_subcommand("run", "Run one experiment from a config file");
  run->add_option("--config", config_path, "Experiment config (key = value)")->required()->check(CLI::ExistingFile);
  run->add_option("--seed", seed, "Override the master seed");
  run->add_option("--paths", paths, "Override the ensemble size M");
  run->add_option("--grid", grid, "Override the number of grid steps N");
  run->add_option("--workers", workers, "Worker threads (results do not depend on it)");

  std::string in_dir;
  auto* rep = app.add_subcommand("report", "Summarize results and write curve files");
  rep->add_option("--in", in_dir, "Directory containing results.csv files")->required();

  std::string suite_name;
  std::string suite_out = "suite-results";
  std::size_t suite_workers = 1;
  auto* suite = app.add_subcommand("suite", "Run a named suite: smoke, paper, oracle");
  suite->add_option("name", suite_name, "Suite name")->required();
  suite->add_option("--out", suite_out, "Output root (overridden by INNOLAB_OUTPUT_DIR)");
  suite->add_option("--workers", suite_workers, "Worker threads");

  app.add_subcommand("list-models", "List built-in drift models and their parameters");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // --help and --version exit 0; every other parse failure is a usage error.
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (run->parsed()) {
      return run_command(config_path, seed, paths, grid, workers);
    }
    if (rep->parsed()) {
      innolab::report(in_dir, std::cout);
      return 0;
    }
    if (suite->parsed()) {
      const char* env = std::getenv(innolab::kOutputEnv);
      const std::filesystem::path root = env != nullptr && *env != '\0' ? env : suite_out;
      return innolab::run_suite(suite_name, root, std::cout, suite_workers);
    }
    list_models();
    return 0;
  } catch (const innolab::UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const innolab::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
