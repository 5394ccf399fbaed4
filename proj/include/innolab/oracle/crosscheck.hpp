#pragma once

#include <cmath>
#include <vector>

#include "innolab/core/errors.hpp"
#include "innolab/criterion/verdict.hpp"
#include "innolab/oracle/atoms.hpp"
#include "innolab/oracle/exact_entropy.hpp"

namespace innolab::oracle {

struct CrosscheckReport {
  ObservationLevel level = ObservationLevel::kInnovation;
  double exact_entropy = 0.0;
  double exact_energy = 0.0;
  Estimate entropy;
  Estimate energy;
  double entropy_error = 0.0;
  double energy_error = 0.0;
  double entropy_relative = 0.0;
  double energy_relative = 0.0;
  /// Largest |Monte Carlo filter - exact filter| at each step over the checked paths.
  std::vector<double> filter_deviation;
  double tolerance = 0.05;
  bool pass = false;
};

namespace detail {

/// Error relative to the exact value, or to the exact energy when the exact
/// value is zero (an absolute error on the scale of the problem).
inline double relative_error(double error, double exact, double scale) {
  if (std::abs(exact) > 1e-12) {
    return error / std::abs(exact);
  }
  return scale > 1e-12 ? error / scale : error;
}

}  // namespace detail

/// Compares an unlocalized Monte Carlo report against the enumeration of the same model.
[[nodiscard]] inline CrosscheckReport estimator_crosscheck(const AtomSpace& space, ObservationLevel level,
                                                           const CriterionReport& monte_carlo,
                                                           std::vector<double> filter_deviation = {},
                                                           double tolerance = 0.05) {
  if (!std::isinf(monte_carlo.level)) {
    throw ConfigurationError("estimator_crosscheck: the Monte Carlo report must be unlocalized");
  }
  if (!filter_deviation.empty() && filter_deviation.size() != space.grid.steps()) {
    throw ConfigurationError("estimator_crosscheck: filter deviations are on a different grid");
  }
  const DiscreteVerdict exact = dpi_verdict(space, level);
  CrosscheckReport out;
  out.level = level;
  out.exact_entropy = exact.conditional_energy;
  out.exact_energy = exact.energy;
  out.entropy = monte_carlo.entropy;
  out.energy = monte_carlo.energy;
  out.entropy_error = std::abs(monte_carlo.entropy.value - exact.conditional_energy);
  out.energy_error = std::abs(monte_carlo.energy.value - exact.energy);
  out.entropy_relative = detail::relative_error(out.entropy_error, exact.conditional_energy, exact.energy);
  out.energy_relative = detail::relative_error(out.energy_error, exact.energy, exact.energy);
  out.filter_deviation = std::move(filter_deviation);
  out.tolerance = tolerance;
  out.pass = out.entropy_relative < tolerance && out.energy_relative < tolerance;
  return out;
}

}  // namespace innolab::oracle
