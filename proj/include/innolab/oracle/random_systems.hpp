#pragma once

#include <memory>
#include <random>
#include <string>
#include <vector>

#include "innolab/core/errors.hpp"
#include "innolab/models/builtin.hpp"
#include "innolab/models/drift_model.hpp"
#include "innolab/oracle/quantized_noise.hpp"

namespace innolab::oracle {

/// Scalar drift read from a table indexed by (step, past noise nodes, aux index).
///
/// The past nodes are recovered from the observed increments, so the drift is
/// a function of B and an independent finite aux variable.
class TableDrift final : public DriftModel {
 public:
  /// values[k][code * aux + a], code = sum_{j<k} node_j m^j.
  TableDrift(QuantizedNoise noise, std::size_t aux, std::vector<std::vector<double>> values)
      : noise_(std::move(noise)), aux_(aux), values_(std::move(values)) {
    if (aux == 0) {
      throw ConfigurationError("table drift needs at least one aux value");
    }
    std::size_t codes = 1;
    for (std::size_t k = 0; k < values_.size(); ++k) {
      if (values_[k].size() != codes * aux_) {
        throw ConfigurationError("table drift: wrong table size at step " + std::to_string(k));
      }
      codes *= noise_.size();
    }
    info_ = {"table", DriftKind::kFeedback, 1, 1, false, false, {{"aux", std::to_string(aux)}}};
  }

  const ModelInfo& info() const noexcept override { return info_; }

  void check_grid(const TimeGrid& grid) const override {
    if (grid.steps() != values_.size()) {
      throw ConfigurationError("table drift was built for a different number of steps");
    }
  }

  TrajectoryState initial_state(std::mt19937_64& aux, std::mt19937_64&) const override {
    std::uniform_int_distribution<std::size_t> pick(0, aux_ - 1);
    return {{static_cast<double>(pick(aux))}, {}, {0.0, 1.0}};
  }

  std::vector<TrajectoryState> finite_states(std::size_t cardinality) const override {
    if (cardinality != aux_) {
      throw ConfigurationError("table drift has aux cardinality " + std::to_string(aux_));
    }
    std::vector<TrajectoryState> states;
    for (std::size_t a = 0; a < aux_; ++a) {
      states.push_back({{static_cast<double>(a)}, {}, {0.0, 1.0}});
    }
    return states;
  }

  void drift(std::size_t k, const TimeGrid&, const Path&, const TrajectoryState& state,
             std::span<double> out) const override {
    const auto code = static_cast<std::size_t>(state.memory[0]);
    out[0] = values_[k][code * aux_ + static_cast<std::size_t>(state.aux[0])];
  }

  void advance(std::size_t, const TimeGrid& grid, std::span<const double> increment, std::span<const double> drift,
               TrajectoryState& state, std::mt19937_64&) const override {
    const double dt = grid.step();
    const std::size_t node = noise_.match(increment[0] - drift[0] * dt, dt);
    if (node >= noise_.size()) {
      throw UsageError("table drift: increment is not a quantized noise node");
    }
    state.memory[0] += static_cast<double>(node) * state.memory[1];
    state.memory[1] *= static_cast<double>(noise_.size());
  }

 private:
  QuantizedNoise noise_;
  std::size_t aux_;
  std::vector<std::vector<double>> values_;
  ModelInfo info_;
};

struct DiscreteInstance {
  std::shared_ptr<const DriftModel> model;
  TimeGrid grid;
  QuantizedNoise noise;
  std::size_t aux_cardinality = 1;
  /// The generator made the drift depend on the aux variable.
  bool aux_dependent = false;
};

/// Small random system; odd indices draw aux-dependent tables.
[[nodiscard]] inline DiscreteInstance random_system(std::uint64_t seed, std::size_t index) {
  std::mt19937_64 engine(RandomStream(seed, index, RandomStream::kAux).engine());
  std::uniform_int_distribution<int> steps_pick(1, 3);
  std::uniform_int_distribution<int> nodes_pick(2, 3);
  std::uniform_int_distribution<int> aux_pick(2, 3);
  std::uniform_int_distribution<int> quarter(-4, 4);
  const auto steps = static_cast<std::size_t>(steps_pick(engine));
  const auto m = static_cast<std::size_t>(nodes_pick(engine));
  const auto aux = static_cast<std::size_t>(aux_pick(engine));
  const bool dependent = index % 2 == 1;

  std::vector<std::vector<double>> values(steps);
  std::size_t codes = 1;
  for (std::size_t k = 0; k < steps; ++k) {
    values[k].resize(codes * aux);
    for (std::size_t code = 0; code < codes; ++code) {
      const double shared = quarter(engine) / 4.0;
      for (std::size_t a = 0; a < aux; ++a) {
        values[k][code * aux + a] = dependent ? quarter(engine) / 4.0 : shared;
      }
    }
    codes *= m;
  }
  if (dependent) {
    // Guarantee the aux variable matters at the last step of the zero-noise prefix.
    values[steps - 1][0] = 1.0;
    values[steps - 1][1] = -1.0;
  }
  auto noise = QuantizedNoise::gaussian(m);
  auto model = std::make_shared<TableDrift>(noise, aux, std::move(values));
  return {std::move(model), TimeGrid(steps), std::move(noise), aux, dependent};
}

/// u'_0 = 0, u'_1 = c theta with theta uniform on {-1, +1} and two-point noise:
/// B alone cannot see theta, so the raw-drift density is not B-measurable.
[[nodiscard]] inline DiscreteInstance information_erasing_witness(double c = 1.0) {
  ModelSpec spec{"independent", {{"shape", "step"}, {"amplitude", format_number(c)}, {"at", "0.5"}}};
  return {make_model(spec), TimeGrid(2), QuantizedNoise::gaussian(2), 2, true};
}

/// u'_0 = 0, u'_1 = sign(dU_0) with two-point noise.
[[nodiscard]] inline DiscreteInstance sign_feedback_instance() {
  return {std::make_shared<models::SignFeedback>(1.0), TimeGrid(2), QuantizedNoise::gaussian(2), 1, false};
}

}  // namespace innolab::oracle
