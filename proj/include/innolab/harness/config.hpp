#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "innolab/core/errors.hpp"
#include "innolab/filtering/second_level.hpp"
#include "innolab/girsanov/girsanov.hpp"
#include "innolab/models/builtin.hpp"

namespace innolab {

enum class RunMode { kContinuous, kDiscrete, kCrosscheck };

[[nodiscard]] inline const char* to_string(RunMode m) noexcept {
  switch (m) {
    case RunMode::kContinuous:
      return "continuous";
    case RunMode::kDiscrete:
      return "discrete";
    case RunMode::kCrosscheck:
      return "crosscheck";
  }
  return "?";
}

enum class FilterChoice { kAuto, kIdentity, kKalman, kParticle, kExact };

[[nodiscard]] inline const char* to_string(FilterChoice f) noexcept {
  switch (f) {
    case FilterChoice::kAuto:
      return "auto";
    case FilterChoice::kIdentity:
      return "identity";
    case FilterChoice::kKalman:
      return "kalman";
    case FilterChoice::kParticle:
      return "particle";
    case FilterChoice::kExact:
      return "exact";
  }
  return "?";
}

struct ExperimentConfig {
  ModelSpec model{"zero", {}};
  std::size_t steps = 128;
  double horizon = 1.0;
  std::size_t paths = 10000;
  std::size_t particles = 400;
  std::vector<double> levels = {0.5, 1.0, 2.0, 4.0, 8.0, kUnlocalized};
  BasisSpec basis;
  std::uint64_t seed = 1;
  std::string output = "results";
  RunMode mode = RunMode::kContinuous;
  ObservationLevel level = ObservationLevel::kInnovation;
  FilterChoice filter = FilterChoice::kAuto;
  /// Quantized noise nodes; 0 means Gaussian increments.
  std::size_t noise_nodes = 0;
  std::size_t aux_cardinality = 2;
  std::size_t workers = 1;
  /// Relative error allowed by the crosscheck.
  double tolerance = 0.05;
  bool raw_paths = false;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) {
    return "";
  }
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& key, const std::string& text) {
  if (text == "inf" || text == "infinity") {
    return kUnlocalized;
  }
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) {
      throw std::invalid_argument(text);
    }
    return v;
  } catch (const std::exception&) {
    throw ConfigurationError("'" + key + "' is not a number: " + text);
  }
}

inline std::size_t parse_count(const std::string& key, const std::string& text) {
  const double v = parse_double(key, text);
  if (!(v >= 0.0) || v != std::floor(v) || v > 1e12) {
    throw ConfigurationError("'" + key + "' must be a nonnegative integer: " + text);
  }
  return static_cast<std::size_t>(v);
}

inline std::vector<double> parse_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    out.push_back(parse_double(key, trim(item)));
  }
  if (out.empty()) {
    throw ConfigurationError("'" + key + "' needs at least one value");
  }
  return out;
}

inline bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes") {
    return true;
  }
  if (text == "false" || text == "0" || text == "no") {
    return false;
  }
  throw ConfigurationError("'" + key + "' must be true or false: " + text);
}

inline std::string format_level(double n) { return std::isinf(n) ? "inf" : format_number(n); }

inline std::string join(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    out += (i ? "," : "") + format_level(values[i]);
  }
  return out;
}

}  // namespace detail

/// Applies one `key = value` setting.
inline void set_option(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  using namespace detail;
  if (key == "model") {
    cfg.model.name = value;
  } else if (key.rfind("model.", 0) == 0 && key.size() > 6) {
    cfg.model.parameters[key.substr(6)] = value;
  } else if (key == "grid.steps") {
    cfg.steps = parse_count(key, value);
  } else if (key == "grid.horizon") {
    cfg.horizon = parse_double(key, value);
  } else if (key == "paths") {
    cfg.paths = parse_count(key, value);
  } else if (key == "particles") {
    cfg.particles = parse_count(key, value);
  } else if (key == "levels") {
    cfg.levels = parse_list(key, value);
    for (double n : cfg.levels) {
      if (!(n > 0.0)) {
        throw ConfigurationError("localization levels must be positive");
      }
    }
  } else if (key == "basis") {
    if (value == "polynomial") {
      cfg.basis.kind = BasisSpec::Kind::kPolynomial;
    } else if (value == "cells") {
      cfg.basis.kind = BasisSpec::Kind::kCells;
    } else {
      throw ConfigurationError("basis must be polynomial or cells");
    }
  } else if (key == "basis.window") {
    cfg.basis.window = parse_count(key, value);
  } else if (key == "basis.rates") {
    cfg.basis.rates = parse_list(key, value);
  } else if (key == "basis.squares") {
    cfg.basis.squares = parse_bool(key, value);
  } else if (key == "basis.ridge") {
    cfg.basis.ridge = parse_double(key, value);
  } else if (key == "seed") {
    cfg.seed = parse_count(key, value);
  } else if (key == "output") {
    cfg.output = value;
  } else if (key == "mode") {
    if (value == "continuous") {
      cfg.mode = RunMode::kContinuous;
    } else if (value == "discrete") {
      cfg.mode = RunMode::kDiscrete;
    } else if (value == "crosscheck") {
      cfg.mode = RunMode::kCrosscheck;
    } else {
      throw ConfigurationError("mode must be continuous, discrete or crosscheck");
    }
  } else if (key == "level") {
    if (value == "innovation") {
      cfg.level = ObservationLevel::kInnovation;
    } else if (value == "strong") {
      cfg.level = ObservationLevel::kStrong;
    } else {
      throw ConfigurationError("level must be innovation or strong");
    }
  } else if (key == "filter") {
    const std::map<std::string, FilterChoice> names = {{"auto", FilterChoice::kAuto},
                                                       {"identity", FilterChoice::kIdentity},
                                                       {"kalman", FilterChoice::kKalman},
                                                       {"particle", FilterChoice::kParticle},
                                                       {"exact", FilterChoice::kExact}};
    auto it = names.find(value);
    if (it == names.end()) {
      throw ConfigurationError("filter must be auto, identity, kalman, particle or exact");
    }
    cfg.filter = it->second;
  } else if (key == "noise.nodes") {
    cfg.noise_nodes = parse_count(key, value);
  } else if (key == "aux.cardinality") {
    cfg.aux_cardinality = parse_count(key, value);
  } else if (key == "workers") {
    cfg.workers = parse_count(key, value);
  } else if (key == "tolerance") {
    cfg.tolerance = parse_double(key, value);
  } else if (key == "raw_paths") {
    cfg.raw_paths = parse_bool(key, value);
  } else {
    throw ConfigurationError("unknown configuration key '" + key + "'");
  }
}

/// Checks cross-field constraints; the model is instantiated to validate it.
inline void validate(const ExperimentConfig& cfg) {
  (void)make_model(cfg.model);
  (void)TimeGrid(cfg.steps, cfg.horizon);
  if (cfg.mode != RunMode::kDiscrete && cfg.paths < 100) {
    throw ConfigurationError("Monte Carlo runs need at least 100 paths");
  }
  if (cfg.mode != RunMode::kContinuous && cfg.noise_nodes == 0) {
    throw ConfigurationError("discrete and crosscheck modes need noise.nodes (quantized noise)");
  }
  if (cfg.noise_nodes == 1) {
    throw ConfigurationError("noise.nodes must be at least 2");
  }
  if (cfg.levels.empty()) {
    throw ConfigurationError("at least one localization level is required");
  }
  if (cfg.aux_cardinality == 0) {
    throw ConfigurationError("aux.cardinality must be positive");
  }
}

/// Parses the key-value format: one `key = value` per line, `#` starts a comment.
[[nodiscard]] inline ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig cfg;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) {
      line.erase(hash);
    }
    line = detail::trim(line);
    if (line.empty()) {
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigurationError("line " + std::to_string(number) + ": expected key = value");
    }
    try {
      set_option(cfg, detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
    } catch (const ConfigurationError& e) {
      throw ConfigurationError("line " + std::to_string(number) + ": " + e.what());
    }
  }
  return cfg;
}

[[nodiscard]] inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigurationError("cannot open config file '" + path + "'");
  }
  return parse_config(in);
}

/// Canonical text of every field; `workers` and `output` are excluded because
/// they do not affect results.
[[nodiscard]] inline std::string canonical_text(const ExperimentConfig& cfg) {
  std::ostringstream os;
  os << "model = " << cfg.model.name << "\n";
  for (const auto& [k, v] : cfg.model.parameters) {
    os << "model." << k << " = " << v << "\n";
  }
  os << "mode = " << to_string(cfg.mode) << "\n"
     << "level = " << to_string(cfg.level) << "\n"
     << "grid.steps = " << cfg.steps << "\n"
     << "grid.horizon = " << format_number(cfg.horizon) << "\n"
     << "paths = " << cfg.paths << "\n"
     << "particles = " << cfg.particles << "\n"
     << "levels = " << detail::join(cfg.levels) << "\n"
     << "basis = " << (cfg.basis.kind == BasisSpec::Kind::kCells ? "cells" : "polynomial") << "\n"
     << "basis.window = " << cfg.basis.window << "\n"
     << "basis.rates = " << detail::join(cfg.basis.rates) << "\n"
     << "basis.squares = " << (cfg.basis.squares ? "true" : "false") << "\n"
     << "basis.ridge = " << format_number(cfg.basis.ridge) << "\n"
     << "filter = " << to_string(cfg.filter) << "\n"
     << "noise.nodes = " << cfg.noise_nodes << "\n"
     << "aux.cardinality = " << cfg.aux_cardinality << "\n"
     << "tolerance = " << format_number(cfg.tolerance) << "\n"
     << "raw_paths = " << (cfg.raw_paths ? "true" : "false") << "\n"
     << "seed = " << cfg.seed << "\n";
  return os.str();
}

/// FNV-1a digest of the canonical text, as 16 hex digits.
[[nodiscard]] inline std::string config_digest(const ExperimentConfig& cfg) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : canonical_text(cfg)) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << h;
  return os.str();
}

}  // namespace innolab
