#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "innolab/core/errors.hpp"
#include "innolab/core/summation.hpp"
#include "innolab/girsanov/girsanov.hpp"
#include "innolab/oracle/atoms.hpp"

namespace innolab::oracle {

/// sum p log(p / q) over a common finite index set, with 0 log 0 = 0.
[[nodiscard]] inline double exact_relative_entropy(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) {
    throw ShapeError("exact_relative_entropy: laws have different sizes");
  }
  CompensatedSum h;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] < 0.0 || q[i] < 0.0) {
      throw ConfigurationError("exact_relative_entropy: negative probability");
    }
    if (p[i] == 0.0) {
      continue;
    }
    if (q[i] == 0.0) {
      throw AbsoluteContinuityError("exact_relative_entropy: p charges index " + std::to_string(i) +
                                    " where q vanishes");
    }
    h += p[i] * std::log(p[i] / q[i]);
  }
  return h.value();
}

struct DiscreteVerdict {
  ObservationLevel level = ObservationLevel::kStrong;
  /// E_P[rho] before normalization (1 for Gaussian noise; not exactly 1 when quantized).
  double normalization = 1.0;
  /// H(nu | P).
  double path_entropy = 0.0;
  /// H(Z(nu) | Z(P)).
  double observation_entropy = 0.0;
  /// 1/2 E_nu[sum |v_k|^2 dt] for the removed drift v.
  double energy = 0.0;
  /// 1/2 E_nu[sum |E_nu[v_k | Z_0..Z_k]|^2 dt]: the value the Monte Carlo entropy estimator targets.
  double conditional_energy = 0.0;
  bool density_measurable = false;
  bool recoverable = false;
  /// observation_entropy == path_entropy to 1e-12.
  bool dpi_equal = false;

  [[nodiscard]] double dpi_gap() const noexcept { return path_entropy - observation_entropy; }
  [[nodiscard]] double drift_gap() const noexcept { return energy - conditional_energy; }
};

namespace detail {

inline bool close_relative(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace detail

/// Data-processing check for the Girsanov change of measure at one level.
///
/// nu has density rho / E_P[rho] with the same discrete weight formula as the
/// Monte Carlo pipeline; Z-classes are exact value tuples of the whole observed path.
[[nodiscard]] inline DiscreteVerdict dpi_verdict(const AtomSpace& space,
                                                 ObservationLevel level = ObservationLevel::kStrong) {
  const std::size_t count = space.atoms.size();
  const TimeGrid& grid = space.grid;
  const double dt = grid.step();
  DiscreteVerdict out;
  out.level = level;

  std::vector<double> log_rho(count);
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < count; ++a) {
    log_rho[a] = girsanov_log_weight(space.removed_drift(a, level), space.observed(a, level)).value;
    top = std::max(top, log_rho[a]);
  }
  CompensatedSum mass;
  for (std::size_t a = 0; a < count; ++a) {
    mass += space.atoms[a].probability * std::exp(log_rho[a] - top);
  }
  const double log_norm = top + std::log(mass.value());
  out.normalization = std::exp(log_norm);

  std::vector<double> nu(count);
  CompensatedSum path_entropy;
  CompensatedSum energy_sum;
  for (std::size_t a = 0; a < count; ++a) {
    const double log_density = log_rho[a] - log_norm;
    nu[a] = space.atoms[a].probability * std::exp(log_density);
    path_entropy += nu[a] * log_density;
    energy_sum += nu[a] * energy(space.removed_drift(a, level));
  }
  out.path_entropy = path_entropy.value();
  out.energy = 0.5 * energy_sum.value();

  // Pushforward on whole observed paths.
  struct ClassData {
    double p = 0.0;
    double q = 0.0;
    double log_density = 0.0;
    const Path* observation = nullptr;
    bool density_constant = true;
    bool observation_constant = true;
  };
  std::map<PathKey, ClassData> classes;
  const std::size_t last = grid.steps();
  for (std::size_t a = 0; a < count; ++a) {
    auto [it, fresh] = classes.try_emplace(prefix_key(space.observed(a, level), last));
    ClassData& cls = it->second;
    const double log_density = log_rho[a] - log_norm;
    if (fresh) {
      cls.log_density = log_density;
      cls.observation = &space.atoms[a].observation;
    } else {
      cls.density_constant = cls.density_constant && detail::close_relative(cls.log_density, log_density, 1e-10);
      cls.observation_constant =
          cls.observation_constant && prefix_key(*cls.observation, last) == prefix_key(space.atoms[a].observation, last);
    }
    cls.p += nu[a];
    cls.q += space.atoms[a].probability;
  }
  std::vector<double> p;
  std::vector<double> q;
  out.density_measurable = true;
  out.recoverable = true;
  for (const auto& [key, cls] : classes) {
    p.push_back(cls.p);
    q.push_back(cls.q);
    out.density_measurable = out.density_measurable && cls.density_constant;
    out.recoverable = out.recoverable && cls.observation_constant;
  }
  out.observation_entropy = exact_relative_entropy(p, q);
  out.dpi_equal = std::abs(out.path_entropy - out.observation_entropy) <= 1e-12;

  // E_nu[v_k | Z_0..Z_k] by class averages at each step.
  const std::size_t d = space.atoms.empty() ? 1 : space.atoms.front().drift.dimension();
  CompensatedSum conditional;
  for (std::size_t k = 0; k < grid.steps(); ++k) {
    std::map<PathKey, std::pair<double, std::vector<double>>> prefix;
    for (std::size_t a = 0; a < count; ++a) {
      auto& entry = prefix[prefix_key(space.observed(a, level), k)];
      entry.second.resize(d, 0.0);
      entry.first += nu[a];
      for (std::size_t c = 0; c < d; ++c) {
        entry.second[c] += nu[a] * space.removed_drift(a, level)(k, c);
      }
    }
    for (const auto& [key, entry] : prefix) {
      if (entry.first <= 0.0) {
        continue;
      }
      for (double s : entry.second) {
        // sum over the class of nu * mean^2 = (sum nu v)^2 / (sum nu)
        conditional += s * s / entry.first;
      }
    }
  }
  out.conditional_energy = 0.5 * conditional.value() * dt;
  return out;
}

}  // namespace innolab::oracle
