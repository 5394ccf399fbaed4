#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "innolab/core/errors.hpp"
#include "innolab/core/stochastic.hpp"
#include "innolab/core/summation.hpp"
#include "innolab/filtering/second_level.hpp"
#include "innolab/girsanov/girsanov.hpp"

namespace innolab {

/// A self-normalized estimate with its delta-method standard error.
struct Estimate {
  double value = 0.0;
  double standard_error = 0.0;
};

/// sum_i w_i v_i with SE^2 = sum_i w_i^2 (v_i - mean)^2 (weights sum to one).
[[nodiscard]] inline Estimate weighted_estimate(std::span<const double> weights, std::span<const double> values) {
  if (weights.size() != values.size() || weights.empty()) {
    throw ShapeError("weighted_estimate: size mismatch");
  }
  CompensatedSum mean;
  for (std::size_t i = 0; i < values.size(); ++i) {
    mean += weights[i] * values[i];
  }
  const double m = mean.value();
  CompensatedSum var;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double dev = weights[i] * (values[i] - m);
    var += dev * dev;
  }
  return {m, std::sqrt(var.value())};
}

/// Right-hand side of the criterion: 1/2 E_nu[|u-hat_n|_H^2].
[[nodiscard]] inline Estimate energy_under_nu(const WeightedEnsemble& ensemble,
                                              std::span<const AdaptedSamples> localized) {
  if (localized.size() != ensemble.size()) {
    throw ShapeError("energy_under_nu: ensemble size mismatch");
  }
  std::vector<double> half_energy(localized.size());
  for (std::size_t i = 0; i < localized.size(); ++i) {
    half_energy[i] = 0.5 * energy(localized[i]);
  }
  return weighted_estimate(ensemble.weights, half_energy);
}

/// Per-member 1/2 sum_k |fit_k|^2 dt from second-level fits at every step.
[[nodiscard]] inline std::vector<double> conditional_half_energies(std::span<const SecondLevelFit> fits,
                                                                   std::size_t members, const TimeGrid& grid) {
  if (fits.size() != grid.steps()) {
    throw UsageError("entropy estimator: second-level fits are missing for some steps (" +
                     std::to_string(fits.size()) + " of " + std::to_string(grid.steps()) + ")");
  }
  std::vector<CompensatedSum> acc(members);
  for (const auto& fit : fits) {
    if (fit.fitted.size() != members * fit.dimension) {
      throw ShapeError("entropy estimator: fit does not cover the ensemble");
    }
    for (std::size_t i = 0; i < members; ++i) {
      for (std::size_t c = 0; c < fit.dimension; ++c) {
        const double v = fit.value(i, c);
        acc[i] += v * v;
      }
    }
  }
  std::vector<double> out(members);
  for (std::size_t i = 0; i < members; ++i) {
    out[i] = 0.5 * acc[i].value() * grid.step();
  }
  return out;
}

/// Left-hand side: the entropy of the innovation law under nu, estimated as
/// half the nu-energy of its own conditional drift E_nu[u-hat | Z]. Projection
/// onto a finite basis can only lower it.
[[nodiscard]] inline Estimate entropy_jensen_estimator(const WeightedEnsemble& ensemble,
                                                       std::span<const SecondLevelFit> fits, const TimeGrid& grid) {
  return weighted_estimate(ensemble.weights, conditional_half_energies(fits, ensemble.size(), grid));
}

/// Ĥ <= Ê + 3 sqrt(SE_H^2 + SE_E^2), with 1e-12 relative slack for rounding
/// when both sides are computed without sampling error.
[[nodiscard]] inline bool inequality_check(const Estimate& entropy, const Estimate& energy_estimate,
                                           double se_multiplier = 3.0) {
  const double combined = std::hypot(entropy.standard_error, energy_estimate.standard_error);
  const double rounding = 1e-12 * std::max(1.0, std::abs(energy_estimate.value));
  return entropy.value <= energy_estimate.value + se_multiplier * combined + rounding;
}

}  // namespace innolab
