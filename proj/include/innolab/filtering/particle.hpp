#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "innolab/core/errors.hpp"
#include "innolab/core/random.hpp"
#include "innolab/filtering/filter_estimate.hpp"
#include "innolab/models/drift_model.hpp"

namespace innolab {

struct ParticleOptions {
  /// Resample when ESS falls below this fraction of the particle count.
  double resample_fraction = 0.5;
};

namespace detail {

/// Normalizes log-weights in place into `weights`; returns false if every
/// weight underflows or is non-finite.
inline bool normalize_log_weights(const std::vector<double>& log_w, std::vector<double>& weights) {
  double top = -std::numeric_limits<double>::infinity();
  for (double l : log_w) {
    if (l > top) {
      top = l;
    }
  }
  if (!std::isfinite(top)) {
    return false;
  }
  double total = 0.0;
  for (std::size_t j = 0; j < log_w.size(); ++j) {
    weights[j] = std::exp(log_w[j] - top);
    total += weights[j];
  }
  if (!(total > 0.0) || !std::isfinite(total)) {
    return false;
  }
  for (double& w : weights) {
    w /= total;
  }
  return true;
}

/// Systematic resampling: returns ancestor indices.
template <class Engine>
std::vector<std::size_t> systematic_resample(const std::vector<double>& weights, Engine& engine) {
  const std::size_t n = weights.size();
  std::vector<std::size_t> ancestors(n);
  std::uniform_real_distribution<double> uniform(0.0, 1.0 / static_cast<double>(n));
  const double offset = uniform(engine);
  double cumulative = weights[0];
  std::size_t j = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double target = offset + static_cast<double>(i) / static_cast<double>(n);
    while (target > cumulative && j + 1 < n) {
      ++j;
      cumulative += weights[j];
    }
    ancestors[i] = j;
  }
  return ancestors;
}

}  // namespace detail

/// Sequential Monte Carlo estimate of E[u'_k | U_0..U_k].
///
/// Each particle replays the model's hidden and auxiliary randomness along
/// the observed path. Particle weights are the Kallianpur-Striebel factors
/// exp(sum u' dU - 1/2 sum |u'|^2 dt), accumulated causally; the estimate at
/// step k uses the weights known at t_k.
[[nodiscard]] inline FilterEstimate particle_conditional_drift(const DriftModel& model, const Path& observation,
                                                               std::size_t particles, const RandomStream& stream,
                                                               const ParticleOptions& options = {}) {
  const ModelInfo& info = model.info();
  if (particles < 100) {
    throw UsageError("particle_conditional_drift: need at least 100 particles");
  }
  if (info.aux_dimension == 0 && !info.hidden_noise) {
    throw UsageError("particle_conditional_drift: model '" + info.name +
                     "' has no hidden randomness; use identity_feedback");
  }
  if (observation.dimension() != info.dimension) {
    throw ShapeError("particle_conditional_drift: observation dimension does not match the model");
  }
  const TimeGrid& grid = observation.grid();
  model.check_grid(grid);
  const std::size_t d = info.dimension;
  const double dt = grid.step();
  auto engine = stream.with_lane(RandomStream::kFilter).engine();

  std::vector<TrajectoryState> states;
  states.reserve(particles);
  for (std::size_t j = 0; j < particles; ++j) {
    states.push_back(model.initial_state(engine, engine));
  }
  std::vector<double> log_w(particles, 0.0);
  std::vector<double> weights(particles, 1.0 / static_cast<double>(particles));
  std::vector<double> drifts(particles * d);
  std::vector<double> increment(d);

  FilterEstimate est{AdaptedSamples(grid, d), FilterMethod::kParticle, particles, {}};
  est.ess.resize(grid.steps());
  for (std::size_t k = 0; k < grid.steps(); ++k) {
    for (std::size_t c = 0; c < d; ++c) {
      increment[c] = observation.increment(k, c);
    }
    auto out = est.values.row(k);
    const bool varies = model.state_dependent(k, grid);
    if (!varies) {
      model.drift(k, grid, observation, states[0], out);
      for (std::size_t j = 0; j < particles; ++j) {
        std::copy(out.begin(), out.end(), drifts.begin() + static_cast<std::ptrdiff_t>(j * d));
      }
    } else {
      bool identical = true;
      for (std::size_t j = 0; j < particles; ++j) {
        std::span<double> u(drifts.data() + j * d, d);
        model.drift(k, grid, observation, states[j], u);
        for (std::size_t c = 0; c < d && identical; ++c) {
          identical = u[c] == drifts[c];
        }
      }
      for (std::size_t c = 0; c < d; ++c) {
        if (identical) {
          out[c] = drifts[c];
          continue;
        }
        double mean = 0.0;
        for (std::size_t j = 0; j < particles; ++j) {
          mean += weights[j] * drifts[j * d + c];
        }
        out[c] = mean;
      }
      for (std::size_t j = 0; j < particles; ++j) {
        double inc = 0.0;
        for (std::size_t c = 0; c < d; ++c) {
          const double u = drifts[j * d + c];
          inc += u * increment[c] - 0.5 * u * u * dt;
        }
        log_w[j] += inc;
      }
      if (!detail::normalize_log_weights(log_w, weights)) {
        throw DegeneracyError("particle filter weights underflowed", k);
      }
    }

    double sum_sq = 0.0;
    for (double w : weights) {
      sum_sq += w * w;
    }
    est.ess[k] = 1.0 / sum_sq;

    for (std::size_t j = 0; j < particles; ++j) {
      model.advance(k, grid, increment, std::span<const double>(drifts.data() + j * d, d), states[j], engine);
    }

    if (est.ess[k] < options.resample_fraction * static_cast<double>(particles)) {
      const auto ancestors = detail::systematic_resample(weights, engine);
      std::vector<TrajectoryState> next;
      next.reserve(particles);
      for (std::size_t a : ancestors) {
        next.push_back(states[a]);
      }
      states = std::move(next);
      std::fill(log_w.begin(), log_w.end(), 0.0);
      std::fill(weights.begin(), weights.end(), 1.0 / static_cast<double>(particles));
    }
  }
  return est;
}

}  // namespace innolab
