#pragma once

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "innolab/core/errors.hpp"
#include "innolab/harness/config.hpp"
#include "innolab/harness/pipeline.hpp"

namespace innolab {

inline constexpr const char* kVersion = "innolab 0.1.0";
inline constexpr const char* kOutputEnv = "INNOLAB_OUTPUT_DIR";
inline constexpr const char* kResultsHeader = "model,n,H_hat,H_se,E_hat,E_se,gap,ess,norm_mean,norm_se,verdict";

/// The configured output directory, unless the environment overrides it.
[[nodiscard]] inline std::filesystem::path output_directory(const ExperimentConfig& cfg) {
  if (const char* env = std::getenv(kOutputEnv); env != nullptr && *env != '\0') {
    return env;
  }
  return cfg.output;
}

namespace detail {

/// Round-trip text, or an empty field for non-finite values.
inline std::string csv_number(double v) { return std::isfinite(v) ? format_number(v) : ""; }

inline void put_number(nlohmann::ordered_json& obj, const std::string& key, double v, const char* reason) {
  if (std::isfinite(v)) {
    obj[key] = v;
  } else {
    obj[key] = nullptr;
    obj[key + "_reason"] = reason;
  }
}

inline std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw ConfigurationError("cannot write '" + path.string() + "'");
  }
  return out;
}

}  // namespace detail

/// results.csv text: one row per localization level, fixed columns, no timing.
[[nodiscard]] inline std::string results_csv(const ExperimentResult& result) {
  std::ostringstream os;
  os << kResultsHeader << "\n";
  for (const auto& r : result.reports) {
    os << result.config.model.name << "," << detail::format_level(r.level) << "," << detail::csv_number(r.entropy.value)
       << "," << detail::csv_number(r.entropy.standard_error) << "," << detail::csv_number(r.energy.value) << ","
       << detail::csv_number(r.energy.standard_error) << "," << detail::csv_number(r.gap.value) << ","
       << detail::csv_number(r.effective_sample_size) << "," << detail::csv_number(r.normalization.mean) << ","
       << detail::csv_number(r.normalization.standard_error) << "," << to_string(r.verdict) << "\n";
  }
  return os.str();
}

[[nodiscard]] inline nlohmann::ordered_json run_record(const ExperimentResult& result) {
  using nlohmann::ordered_json;
  const bool discrete = result.config.mode == RunMode::kDiscrete;
  ordered_json rec;
  rec["version"] = kVersion;
  rec["config_digest"] = result.digest;
  rec["model"] = result.config.model.name;
  rec["mode"] = to_string(result.config.mode);
  rec["level"] = to_string(result.config.level);
  rec["filter_method"] = result.filter_method;
  rec["seed"] = result.config.seed;
  rec["paths"] = result.config.paths;
  rec["steps"] = result.config.steps;
  rec["verdict"] = to_string(result.verdict.verdict);
  ordered_json levels = ordered_json::array();
  for (const auto& r : result.reports) {
    ordered_json row;
    detail::put_number(row, "n", r.level, "unlocalized");
    row["H_hat"] = r.entropy.value;
    row["H_se"] = r.entropy.standard_error;
    row["E_hat"] = r.energy.value;
    row["E_se"] = r.energy.standard_error;
    row["gap"] = r.gap.value;
    row["gap_se"] = r.gap.standard_error;
    detail::put_number(row, "ess", r.effective_sample_size, discrete ? "exact-enumeration" : "undefined");
    row["norm_mean"] = r.normalization.mean;
    row["norm_se"] = r.normalization.standard_error;
    row["norm_pass"] = r.normalization.pass;
    detail::put_number(row, "H_U", r.observation_entropy.value,
                       discrete ? "exact-enumeration" : "strong-level run has no filtered drift");
    detail::put_number(row, "E_U", r.observation_energy.value,
                       discrete ? "exact-enumeration" : "strong-level run has no filtered drift");
    row["basis"] = r.basis;
    row["verdict"] = to_string(r.verdict);
    levels.push_back(row);
  }
  rec["levels"] = levels;
  ordered_json diag;
  if (result.brownianity) {
    diag["innovation_variance_ratio"] = result.brownianity->variance_ratio;
    diag["innovation_lag1"] = result.brownianity->lag1_correlation;
    diag["innovation_lag1_threshold"] = result.brownianity->lag1_threshold;
    diag["innovation_brownian"] = result.brownianity->pass;
  } else {
    diag["innovation_brownian"] = nullptr;
    diag["innovation_brownian_reason"] = discrete ? "exact-enumeration" : "strong-level run";
  }
  if (result.filter_min_ess) {
    diag["filter_min_ess"] = *result.filter_min_ess;
  } else {
    diag["filter_min_ess"] = nullptr;
    diag["filter_min_ess_reason"] = "exact filter";
  }
  rec["diagnostics"] = diag;
  if (result.exact) {
    const auto& e = *result.exact;
    rec["exact"] = {{"level", to_string(e.level)},
                    {"normalization", e.normalization},
                    {"path_entropy", e.path_entropy},
                    {"observation_entropy", e.observation_entropy},
                    {"energy", e.energy},
                    {"conditional_energy", e.conditional_energy},
                    {"density_measurable", e.density_measurable},
                    {"recoverable", e.recoverable},
                    {"dpi_equal", e.dpi_equal}};
  }
  if (result.crosscheck) {
    const auto& c = *result.crosscheck;
    rec["crosscheck"] = {{"entropy_relative", c.entropy_relative},
                         {"energy_relative", c.energy_relative},
                         {"entropy_error", c.entropy_error},
                         {"energy_error", c.energy_error},
                         {"filter_deviation", c.filter_deviation},
                         {"tolerance", c.tolerance},
                         {"pass", c.pass}};
  }
  rec["failures"] = result.failures;
  rec["wall_clock_s"] = result.wall_clock_seconds;
  return rec;
}

/// Writes config.txt, results.csv, run.jsonl (appended) and optionally paths.csv.
inline void write_outputs(const ExperimentResult& result, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  detail::open_out(dir / "config.txt") << canonical_text(result.config);
  detail::open_out(dir / "results.csv") << results_csv(result);
  {
    std::ofstream jsonl(dir / "run.jsonl", std::ios::app | std::ios::binary);
    if (!jsonl) {
      throw ConfigurationError("cannot write '" + (dir / "run.jsonl").string() + "'");
    }
    jsonl << run_record(result).dump() << "\n";
  }
  if (!result.paths.empty()) {
    auto out = detail::open_out(dir / "paths.csv");
    out << "path,raw_energy,removed_energy,log_weight,terminal\n";
    for (std::size_t i = 0; i < result.paths.size(); ++i) {
      const auto& p = result.paths[i];
      out << i << "," << format_number(p.raw_energy) << "," << format_number(p.removed_energy) << ","
          << format_number(p.log_weight) << "," << format_number(p.terminal) << "\n";
    }
  }
}

/// One parsed results.csv row; absent numeric fields are NaN.
struct ResultRow {
  std::string model;
  double n = kUnlocalized;
  double h_hat = 0.0;
  double h_se = 0.0;
  double e_hat = 0.0;
  double e_se = 0.0;
  double gap = 0.0;
  double ess = 0.0;
  double norm_mean = 0.0;
  double norm_se = 0.0;
  std::string verdict;
};

[[nodiscard]] inline std::vector<ResultRow> read_results(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) {
    throw ConfigurationError("cannot read '" + file.string() + "'");
  }
  std::string line;
  if (!std::getline(in, line) || line != kResultsHeader) {
    throw ConfigurationError("'" + file.string() + "' is not a results file");
  }
  const auto number = [](const std::string& s) {
    return s.empty() ? std::numeric_limits<double>::quiet_NaN() : detail::parse_double("field", s);
  };
  std::vector<ResultRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) {
      continue;
    }
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, ',')) {
      f.push_back(item);
    }
    if (!line.empty() && line.back() == ',') {
      f.emplace_back();
    }
    if (f.size() != 11) {
      throw ConfigurationError("malformed row in '" + file.string() + "': " + line);
    }
    rows.push_back({f[0], number(f[1]), number(f[2]), number(f[3]), number(f[4]), number(f[5]), number(f[6]),
                    number(f[7]), number(f[8]), number(f[9]), f[10]});
  }
  return rows;
}

}  // namespace innolab
