#pragma once

#include <memory>
#include <random>
#include <vector>

#include "innolab/models/drift_model.hpp"

namespace innolab {

/// Wraps a model so that its initial state is drawn uniformly from
/// finite_states(cardinality); everything else is delegated.
class FiniteAuxModel final : public DriftModel {
 public:
  FiniteAuxModel(std::shared_ptr<const DriftModel> base, std::size_t cardinality)
      : base_(std::move(base)), cardinality_(cardinality), states_(base_->finite_states(cardinality)) {}

  const ModelInfo& info() const noexcept override { return base_->info(); }
  const DriftModel& base() const noexcept { return *base_; }
  void check_grid(const TimeGrid& grid) const override { base_->check_grid(grid); }

  TrajectoryState initial_state(std::mt19937_64& aux, std::mt19937_64&) const override {
    std::uniform_int_distribution<std::size_t> pick(0, states_.size() - 1);
    return states_[pick(aux)];
  }
  std::vector<TrajectoryState> finite_states(std::size_t cardinality) const override {
    return base_->finite_states(cardinality);
  }
  void drift(std::size_t k, const TimeGrid& grid, const Path& observed, const TrajectoryState& state,
             std::span<double> out) const override {
    base_->drift(k, grid, observed, state, out);
  }
  void advance(std::size_t k, const TimeGrid& grid, std::span<const double> increment, std::span<const double> drift,
               TrajectoryState& state, std::mt19937_64& hidden) const override {
    base_->advance(k, grid, increment, drift, state, hidden);
  }
  bool state_dependent(std::size_t k, const TimeGrid& grid) const override { return base_->state_dependent(k, grid); }

 private:
  std::shared_ptr<const DriftModel> base_;
  std::size_t cardinality_;
  std::vector<TrajectoryState> states_;
};

}  // namespace innolab
