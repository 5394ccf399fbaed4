#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "innolab/core/errors.hpp"
#include "innolab/filtering/filter_estimate.hpp"

namespace innolab {

/// Euler-discretized Riccati variances P_0..P_N for dX = -beta X dt + sigma dV
/// observed as dU = X dt + dB.
[[nodiscard]] inline std::vector<double> riccati_variances(const TimeGrid& grid, double beta, double sigma,
                                                           double initial_variance) {
  const double dt = grid.step();
  std::vector<double> p(grid.steps() + 1);
  p[0] = initial_variance;
  for (std::size_t k = 0; k < grid.steps(); ++k) {
    p[k + 1] = p[k] + (sigma * sigma - 2.0 * beta * p[k] - p[k] * p[k]) * dt;
    if (p[k + 1] < 0.0 || !std::isfinite(p[k + 1])) {
      throw StabilityError("Riccati variance became negative at step " + std::to_string(k + 1) +
                           "; refine the grid (dt = " + std::to_string(dt) + ")");
    }
  }
  return p;
}

/// Exact linear filter for the kalman-bucy model: values[k] = E[X_{t_k} | U_0..U_k].
///
/// The initial variance defaults to the stationary law sigma^2 / (2 beta).
[[nodiscard]] inline FilterEstimate kalman_bucy_filter(const Path& observation, double beta, double sigma,
                                                       std::optional<double> initial_variance = std::nullopt) {
  if (observation.dimension() != 1) {
    throw ShapeError("kalman_bucy_filter: observation must be one-dimensional");
  }
  if (!(beta >= 0.0) || !(sigma > 0.0)) {
    throw ConfigurationError("kalman_bucy_filter: need beta >= 0 and sigma > 0");
  }
  const double p0 = initial_variance.value_or(beta > 0.0 ? sigma * sigma / (2.0 * beta) : 0.0);
  const TimeGrid& grid = observation.grid();
  const auto p = riccati_variances(grid, beta, sigma, p0);
  const double dt = grid.step();

  FilterEstimate est{AdaptedSamples(grid, 1), FilterMethod::kExactKalman, 0, {}};
  double mean = 0.0;
  for (std::size_t k = 0; k < grid.steps(); ++k) {
    est.values(k) = mean;
    const double innovation = observation.increment(k) - mean * dt;
    mean += -beta * mean * dt + p[k] * innovation;
  }
  return est;
}

}  // namespace innolab
