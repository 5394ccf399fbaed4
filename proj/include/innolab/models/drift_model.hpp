#pragma once

#include <cstddef>
#include <random>
#include <sstream>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "innolab/core/errors.hpp"
#include "innolab/core/grid.hpp"
#include "innolab/core/random.hpp"
#include "innolab/oracle/quantized_noise.hpp"

namespace innolab {

/// Shortest round-trip text for a parameter value.
[[nodiscard]] inline std::string format_number(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

enum class DriftKind { kExogenous, kFeedback, kHiddenSignal };

[[nodiscard]] inline const char* to_string(DriftKind kind) noexcept {
  switch (kind) {
    case DriftKind::kExogenous:
      return "exogenous";
    case DriftKind::kFeedback:
      return "feedback";
    case DriftKind::kHiddenSignal:
      return "hidden-signal";
  }
  return "?";
}

struct ModelInfo {
  std::string name;
  DriftKind kind = DriftKind::kExogenous;
  std::size_t dimension = 1;
  /// Number of scalar draws, independent of B, fixed at time zero.
  std::size_t aux_dimension = 0;
  /// The model evolves a hidden signal with its own noise (not finitely enumerable).
  bool hidden_noise = false;
  /// The drift is a functional of the observation U alone, so E[u|U] = u.
  bool observation_adapted = false;
  std::vector<std::pair<std::string, std::string>> parameters;
};

/// Per-trajectory randomness and bookkeeping carried by a drift model.
struct TrajectoryState {
  std::vector<double> aux;
  std::vector<double> hidden;
  std::vector<double> memory;
};

/// Drift process u' of an adapted perturbation U = B + int u' ds.
///
/// drift() at step k may read observed rows 0..k only, plus the state; the
/// state is updated by advance() once the k-th observed increment is known.
/// The same interface drives simulation and every filter, so particles and
/// enumerated atoms replay exactly the simulated mechanics.
class DriftModel {
 public:
  virtual ~DriftModel() = default;

  [[nodiscard]] virtual const ModelInfo& info() const noexcept = 0;

  virtual void check_grid(const TimeGrid& /*grid*/) const {}

  [[nodiscard]] virtual TrajectoryState initial_state(std::mt19937_64& /*aux*/, std::mt19937_64& /*hidden*/) const {
    return {};
  }

  /// Equally likely initial states replacing the continuous aux law by a
  /// finite uniform one with `cardinality` values per aux coordinate.
  [[nodiscard]] virtual std::vector<TrajectoryState> finite_states(std::size_t /*cardinality*/) const {
    if (info().hidden_noise || info().aux_dimension > 0) {
      throw UnsupportedModelError("model '" + info().name + "' has no finite auxiliary law");
    }
    return {TrajectoryState{}};
  }

  virtual void drift(std::size_t k, const TimeGrid& grid, const Path& observed, const TrajectoryState& state,
                     std::span<double> out) const = 0;

  virtual void advance(std::size_t /*k*/, const TimeGrid& /*grid*/, std::span<const double> /*observed_increment*/,
                       std::span<const double> /*drift*/, TrajectoryState& /*state*/,
                       std::mt19937_64& /*hidden*/) const {}

  /// False when the drift at step k is the same for every state given the
  /// observed history; filters then skip per-particle work.
  [[nodiscard]] virtual bool state_dependent(std::size_t /*k*/, const TimeGrid& /*grid*/) const { return true; }
};

/// Driving noise: Gaussian increments or a quantized stand-in.
class NoiseSource {
 public:
  NoiseSource() = default;
  explicit NoiseSource(oracle::QuantizedNoise quantized) : impl_(std::move(quantized)) {}

  [[nodiscard]] bool quantized() const noexcept { return std::holds_alternative<oracle::QuantizedNoise>(impl_); }
  [[nodiscard]] const oracle::QuantizedNoise& nodes() const { return std::get<oracle::QuantizedNoise>(impl_); }

  class Sampler {
   public:
    Sampler(const NoiseSource& source, double dt)
        : source_(&source), scale_(std::sqrt(dt)), dt_(dt), normal_(0.0, std::sqrt(dt)) {
      if (source.quantized()) {
        const auto& p = source.nodes().probabilities();
        pick_ = std::discrete_distribution<std::size_t>(p.begin(), p.end());
      }
    }

    template <class Engine>
    double operator()(Engine& engine) {
      if (!source_->quantized()) {
        return normal_(engine);
      }
      return source_->nodes().node(pick_(engine), dt_);
    }

   private:
    const NoiseSource* source_;
    double scale_;
    double dt_;
    std::normal_distribution<double> normal_;
    std::discrete_distribution<std::size_t> pick_;
  };

 private:
  std::variant<std::monostate, oracle::QuantizedNoise> impl_;
};

struct SimulationOutput {
  Path brownian;
  Path observation;
  AdaptedSamples drift;
  std::vector<double> aux;
};

/// Euler recursion U_{k+1} = U_k + u'_k dt + dB_k from a single stream.
[[nodiscard]] inline SimulationOutput simulate(const DriftModel& model, const TimeGrid& grid,
                                               const RandomStream& stream, const NoiseSource& noise = {}) {
  model.check_grid(grid);
  const std::size_t d = model.info().dimension;
  const double dt = grid.step();
  SimulationOutput out{Path(grid, d), Path(grid, d), AdaptedSamples(grid, d), {}};
  auto noise_engine = stream.with_lane(RandomStream::kNoise).engine();
  auto aux_engine = stream.with_lane(RandomStream::kAux).engine();
  auto hidden_engine = stream.with_lane(RandomStream::kHidden).engine();
  NoiseSource::Sampler sampler(noise, dt);

  TrajectoryState state = model.initial_state(aux_engine, hidden_engine);
  out.aux = state.aux;
  std::vector<double> increment(d);
  for (std::size_t k = 0; k < grid.steps(); ++k) {
    auto u = out.drift.row(k);
    model.drift(k, grid, out.observation, state, u);
    for (std::size_t c = 0; c < d; ++c) {
      const double db = sampler(noise_engine);
      out.brownian(k + 1, c) = out.brownian(k, c) + db;
      increment[c] = u[c] * dt + db;
      out.observation(k + 1, c) = out.observation(k, c) + increment[c];
    }
    model.advance(k, grid, increment, u, state, hidden_engine);
  }
  return out;
}

}  // namespace innolab
