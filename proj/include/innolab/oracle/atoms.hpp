#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <span>
#include <vector>

#include "innolab/core/errors.hpp"
#include "innolab/core/grid.hpp"
#include "innolab/core/stochastic.hpp"
#include "innolab/core/summation.hpp"
#include "innolab/girsanov/girsanov.hpp"
#include "innolab/models/drift_model.hpp"
#include "innolab/oracle/quantized_noise.hpp"

namespace innolab::oracle {

inline constexpr std::size_t kMaxAtoms = 1'000'000;

/// Exact class key of a path prefix: values rounded to 12 decimals.
using PathKey = std::vector<std::int64_t>;

[[nodiscard]] inline PathKey prefix_key(const Path& path, std::size_t last_row) {
  PathKey key;
  key.reserve((last_row + 1) * path.dimension());
  for (std::size_t k = 0; k <= last_row; ++k) {
    for (double v : path.row(k)) {
      key.push_back(std::llround(v * 1e12));
    }
  }
  return key;
}

/// One (noise sequence, initial state) combination.
struct Atom {
  double probability = 0.0;
  std::size_t state_index = 0;
  std::vector<std::size_t> nodes;
  Path brownian;
  Path observation;
  AdaptedSamples drift;
  /// Exact E_P[u'_k | U_0..U_k].
  AdaptedSamples filtered;
  Path innovation;
};

struct AtomSpace {
  TimeGrid grid;
  QuantizedNoise noise;
  std::size_t aux_cardinality = 1;
  std::vector<Atom> atoms;

  /// Drift removed and process observed at the given level.
  [[nodiscard]] const AdaptedSamples& removed_drift(std::size_t a, ObservationLevel level) const {
    return level == ObservationLevel::kInnovation ? atoms[a].filtered : atoms[a].drift;
  }
  [[nodiscard]] const Path& observed(std::size_t a, ObservationLevel level) const {
    return level == ObservationLevel::kInnovation ? atoms[a].innovation : atoms[a].brownian;
  }

  /// Exact filtered drift along an arbitrary observation path, looked up by
  /// U-prefix; throws if the path is not a positive-probability trajectory.
  [[nodiscard]] AdaptedSamples exact_filter_along(const Path& observation) const {
    AdaptedSamples out(grid, observation.dimension());
    for (std::size_t k = 0; k < grid.steps(); ++k) {
      const auto key = prefix_key(observation, k);
      const Atom* hit = nullptr;
      for (const auto& atom : atoms) {
        if (prefix_key(atom.observation, k) == key) {
          hit = &atom;
          break;
        }
      }
      if (hit == nullptr) {
        throw UsageError("observation path is not an atom trajectory");
      }
      for (std::size_t c = 0; c < out.dimension(); ++c) {
        out(k, c) = hit->filtered(k, c);
      }
    }
    return out;
  }
};

/// Number of atoms m^(N d) * |states|, or kMaxAtoms + 1 on overflow.
[[nodiscard]] inline std::size_t atom_count(std::size_t nodes, std::size_t draws, std::size_t states) {
  std::size_t count = states;
  for (std::size_t i = 0; i < draws; ++i) {
    count *= nodes;
    if (count > kMaxAtoms) {
      return kMaxAtoms + 1;
    }
  }
  return count;
}

/// Deterministic replay of simulate() with given noise nodes.
inline void replay(const DriftModel& model, const QuantizedNoise& noise, TrajectoryState state, Atom& atom) {
  const TimeGrid& grid = atom.observation.grid();
  const std::size_t d = atom.observation.dimension();
  const double dt = grid.step();
  std::vector<double> increment(d);
  std::mt19937_64 unused;
  for (std::size_t k = 0; k < grid.steps(); ++k) {
    auto u = atom.drift.row(k);
    model.drift(k, grid, atom.observation, state, u);
    for (std::size_t c = 0; c < d; ++c) {
      const double db = noise.node(atom.nodes[k * d + c], dt);
      atom.brownian(k + 1, c) = atom.brownian(k, c) + db;
      increment[c] = u[c] * dt + db;
      atom.observation(k + 1, c) = atom.observation(k, c) + increment[c];
    }
    model.advance(k, grid, increment, u, state, unused);
  }
}

/// Every atom of the quantized model with exact filtered drift and innovation.
[[nodiscard]] inline AtomSpace enumerate(const DriftModel& model, const TimeGrid& grid, const QuantizedNoise& noise,
                                         std::size_t aux_cardinality = 2) {
  model.check_grid(grid);
  const std::size_t d = model.info().dimension;
  const std::size_t draws = grid.steps() * d;
  const auto states = model.finite_states(aux_cardinality);
  const std::size_t total = atom_count(noise.size(), draws, states.size());
  if (total > kMaxAtoms) {
    throw ConfigurationError("discrete model has more than 10^6 atoms; reduce steps, nodes or aux cardinality");
  }

  AtomSpace space{grid, noise, aux_cardinality, {}};
  space.atoms.reserve(total);
  const double state_probability = 1.0 / static_cast<double>(states.size());
  std::vector<std::size_t> nodes(draws, 0);
  for (std::size_t s = 0; s < states.size(); ++s) {
    std::fill(nodes.begin(), nodes.end(), 0);
    while (true) {
      Atom atom{state_probability, s, nodes, Path(grid, d), Path(grid, d), AdaptedSamples(grid, d),
                AdaptedSamples(grid, d), Path(grid, d)};
      for (std::size_t i : nodes) {
        atom.probability *= noise.probabilities()[i];
      }
      replay(model, noise, states[s], atom);
      space.atoms.push_back(std::move(atom));
      std::size_t pos = 0;
      while (pos < draws && ++nodes[pos] == noise.size()) {
        nodes[pos++] = 0;
      }
      if (pos == draws) {
        break;
      }
    }
  }

  // Exact filter: probability-weighted drift average within each U-prefix class.
  for (std::size_t k = 0; k < grid.steps(); ++k) {
    std::map<PathKey, std::pair<double, std::vector<double>>> classes;
    for (std::size_t a = 0; a < space.atoms.size(); ++a) {
      const Atom& atom = space.atoms[a];
      auto& entry = classes[prefix_key(atom.observation, k)];
      entry.second.resize(d, 0.0);
      entry.first += atom.probability;
      for (std::size_t c = 0; c < d; ++c) {
        entry.second[c] += atom.probability * atom.drift(k, c);
      }
    }
    for (auto& atom : space.atoms) {
      const auto& entry = classes.at(prefix_key(atom.observation, k));
      for (std::size_t c = 0; c < d; ++c) {
        atom.filtered(k, c) = entry.second[c] / entry.first;
      }
    }
  }
  for (auto& atom : space.atoms) {
    const Path drift_part = primitive(atom.filtered);
    for (std::size_t k = 1; k <= grid.steps(); ++k) {
      for (std::size_t c = 0; c < d; ++c) {
        atom.innovation(k, c) = atom.observation(k, c) - drift_part(k, c);
      }
    }
  }
  return space;
}

}  // namespace innolab::oracle
