#pragma once

#include <cmath>
#include <random>

#include "innolab/core/grid.hpp"
#include "innolab/core/random.hpp"
#include "innolab/core/summation.hpp"

namespace innolab {

/// Brownian path on the grid, started at 0, with independent N(0, dt) increments.
[[nodiscard]] inline Path sample_brownian(const TimeGrid& grid, std::size_t dimension, const RandomStream& stream) {
  Path path(grid, dimension);
  auto engine = stream.engine();
  std::normal_distribution<double> normal(0.0, std::sqrt(grid.step()));
  for (std::size_t k = 0; k < grid.steps(); ++k) {
    for (std::size_t c = 0; c < dimension; ++c) {
      path(k + 1, c) = path(k, c) + normal(engine);
    }
  }
  return path;
}

/// Non-anticipating sum  sum_k <integrand[k], X(t_{k+1}) - X(t_k)>.
[[nodiscard]] inline double ito_integral(const AdaptedSamples& integrand, const Path& integrator) {
  require_same_shape(integrand, integrator, "ito_integral");
  CompensatedSum acc;
  for (std::size_t k = 0; k < integrand.rows(); ++k) {
    for (std::size_t c = 0; c < integrand.dimension(); ++c) {
      acc += integrand(k, c) * integrator.increment(k, c);
    }
  }
  return acc.value();
}

/// Cameron-Martin energy  sum_k |drift[k]|^2 dt.
[[nodiscard]] inline double energy(const AdaptedSamples& drift) {
  CompensatedSum acc;
  for (double v : drift.values()) {
    acc += v * v;
  }
  return acc.value() * drift.grid().step();
}

/// Cumulative left-point integral of the drift; starts at 0.
[[nodiscard]] inline Path primitive(const AdaptedSamples& drift) {
  Path path(drift.grid(), drift.dimension());
  const double dt = drift.grid().step();
  for (std::size_t k = 0; k < drift.rows(); ++k) {
    for (std::size_t c = 0; c < drift.dimension(); ++c) {
      path(k + 1, c) = path(k, c) + drift(k, c) * dt;
    }
  }
  return path;
}

}  // namespace innolab
