#pragma once

#include <chrono>
#include <cmath>
#include <filesystem>
#include <iomanip>
#include <ostream>
#include <string>
#include <vector>

#include "innolab/harness/pipeline.hpp"
#include "innolab/harness/records.hpp"
#include "innolab/harness/report.hpp"
#include "innolab/oracle/battery.hpp"

namespace innolab {

/// Runs one experiment, timing it and persisting its files under `dir`.
inline ExperimentResult run_and_write(const ExperimentConfig& cfg, const std::filesystem::path& dir) {
  const auto start = std::chrono::steady_clock::now();
  ExperimentResult result = run_experiment(cfg);
  result.wall_clock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_outputs(result, dir);
  return result;
}

namespace detail {

struct SuiteCase {
  std::string label;
  ExperimentConfig config;
  /// Verdict the case must reach; unset for exploratory runs.
  std::optional<Verdict> expected;
};

inline ExperimentConfig base_config(const std::string& model, std::size_t paths, std::size_t steps,
                                    std::size_t workers) {
  ExperimentConfig cfg;
  cfg.model.name = model;
  cfg.paths = paths;
  cfg.steps = steps;
  cfg.workers = workers;
  return cfg;
}

inline std::vector<SuiteCase> smoke_cases(std::size_t workers) {
  std::vector<SuiteCase> cases;
  cases.push_back({"zero", base_config("zero", 1000, 128, workers), Verdict::kEqualityConsistent});
  cases.push_back({"deterministic", base_config("deterministic", 1000, 128, workers), Verdict::kEqualityConsistent});
  return cases;
}

inline std::vector<SuiteCase> paper_cases(std::size_t workers) {
  std::vector<SuiteCase> cases;
  for (const char* name : {"zero", "deterministic", "linear-feedback", "independent"}) {
    cases.push_back({name, base_config(name, 10000, 128, workers), Verdict::kEqualityConsistent});
  }
  cases.push_back({"kalman-bucy", base_config("kalman-bucy", 10000, 512, workers), Verdict::kEqualityConsistent});
  cases.push_back({"sign-feedback", base_config("sign-feedback", 10000, 128, workers), std::nullopt});
  auto tsirelson = base_config("tsirelson", 10000, 512, workers);
  tsirelson.model.parameters["K"] = "8";
  cases.push_back({"tsirelson", tsirelson, std::nullopt});
  return cases;
}

inline int run_cases(const std::vector<SuiteCase>& cases, const std::filesystem::path& root, std::ostream& out) {
  int failures = 0;
  for (const auto& c : cases) {
    try {
      const auto result = run_and_write(c.config, root / c.label);
      const auto& last = result.reports.back();
      bool ok = result.failures.empty();
      if (c.expected && result.verdict.verdict != *c.expected) {
        ok = false;
      }
      out << std::left << std::setw(16) << c.label << " " << std::setw(20) << to_string(result.verdict.verdict)
          << " gap(inf) = " << last.gap.value << " +/- " << 1.96 * last.gap.standard_error << " (95% CI)"
          << (c.expected ? "" : " [exploratory]") << (ok ? "" : "  FAIL") << "\n";
      for (const auto& f : result.failures) {
        out << "    " << f << "\n";
      }
      failures += ok ? 0 : 1;
    } catch (const Error& e) {
      out << std::left << std::setw(16) << c.label << " ERROR " << e.what() << "\n";
      ++failures;
    }
  }
  return failures == 0 ? 0 : 1;
}

}  // namespace detail

/// Runs the named suite; returns the process exit status.
inline int run_suite(const std::string& name, const std::filesystem::path& root, std::ostream& out,
                     std::size_t workers = 1) {
  if (name == "smoke") {
    return detail::run_cases(detail::smoke_cases(workers), root / "smoke", out);
  }
  if (name == "paper") {
    return detail::run_cases(detail::paper_cases(workers), root / "paper", out);
  }
  if (name == "oracle") {
    const auto battery = oracle::run_battery();
    for (const auto& c : battery.instances) {
      if (!c.pass()) {
        out << "instance " << c.index << " FAIL\n";
      }
    }
    const auto witness = oracle::check_instance(oracle::information_erasing_witness());
    const bool strict = witness.strong.dpi_gap() > 1e-6 && !witness.strong.recoverable;
    out << battery.passed << "/" << battery.instances.size() << " DPI checks pass (" << battery.equal_cases
        << " equality, " << battery.strict_cases << " strict)\n"
        << "information-erasing witness: H(nu|P) - H(Z(nu)|Z(P)) = " << witness.strong.dpi_gap()
        << (strict ? "" : "  FAIL") << "\n";
    return battery.passed == battery.instances.size() && witness.pass() && strict ? 0 : 1;
  }
  throw UsageError("unknown suite '" + name + "' (smoke, paper, oracle)");
}

}  // namespace innolab
