#pragma once

#include <vector>

#include "innolab/core/errors.hpp"
#include "innolab/filtering/filter_estimate.hpp"
#include "innolab/filtering/particle.hpp"
#include "innolab/models/drift_model.hpp"
#include "innolab/oracle/quantized_noise.hpp"

namespace innolab {

/// Exact E[u'_k | U_0..U_k] when the noise is quantized and the auxiliary law
/// is finite: Bayes over the finite set of initial states, with the node
/// probabilities as likelihoods.
[[nodiscard]] inline FilterEstimate exact_finite_filter(const DriftModel& model, const Path& observation,
                                                        const oracle::QuantizedNoise& noise,
                                                        std::size_t aux_cardinality) {
  const ModelInfo& info = model.info();
  if (observation.dimension() != info.dimension) {
    throw ShapeError("exact_finite_filter: observation dimension does not match the model");
  }
  const TimeGrid& grid = observation.grid();
  model.check_grid(grid);
  const std::size_t d = info.dimension;
  const double dt = grid.step();
  auto states = model.finite_states(aux_cardinality);
  const std::size_t n = states.size();
  std::vector<double> weights(n, 1.0 / static_cast<double>(n));
  std::vector<double> drifts(n * d);
  std::vector<double> increment(d);
  std::mt19937_64 unused;

  FilterEstimate est{AdaptedSamples(grid, d), FilterMethod::kExactEnumeration, 0, {}};
  for (std::size_t k = 0; k < grid.steps(); ++k) {
    for (std::size_t c = 0; c < d; ++c) {
      increment[c] = observation.increment(k, c);
    }
    auto out = est.values.row(k);
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t a = 0; a < n; ++a) {
      std::span<double> u(drifts.data() + a * d, d);
      model.drift(k, grid, observation, states[a], u);
      for (std::size_t c = 0; c < d; ++c) {
        out[c] += weights[a] * u[c];
      }
    }
    double total = 0.0;
    for (std::size_t a = 0; a < n; ++a) {
      if (weights[a] == 0.0) {
        continue;
      }
      for (std::size_t c = 0; c < d; ++c) {
        const std::size_t node = noise.match(increment[c] - drifts[a * d + c] * dt, dt);
        weights[a] *= node < noise.size() ? noise.probabilities()[node] : 0.0;
      }
      total += weights[a];
    }
    if (!(total > 0.0)) {
      throw DegeneracyError("observation is impossible under every auxiliary state", k);
    }
    for (double& w : weights) {
      w /= total;
    }
    for (std::size_t a = 0; a < n; ++a) {
      model.advance(k, grid, increment, std::span<const double>(drifts.data() + a * d, d), states[a], unused);
    }
  }
  return est;
}

}  // namespace innolab
