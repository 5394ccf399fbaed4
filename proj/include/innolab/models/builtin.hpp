#pragma once

#include <cmath>
#include <map>
#include <memory>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "innolab/models/drift_model.hpp"

namespace innolab {

/// Model name plus its textual parameters, as read from a configuration file.
struct ModelSpec {
  std::string name;
  std::map<std::string, std::string> parameters;

  [[nodiscard]] double number(const std::string& key, double fallback) const {
    auto it = parameters.find(key);
    if (it == parameters.end()) {
      return fallback;
    }
    try {
      std::size_t used = 0;
      const double v = std::stod(it->second, &used);
      if (used != it->second.size()) {
        throw std::invalid_argument(it->second);
      }
      return v;
    } catch (const std::exception&) {
      throw ConfigurationError("model parameter '" + key + "' is not a number: " + it->second);
    }
  }

  [[nodiscard]] std::string text(const std::string& key, const std::string& fallback) const {
    auto it = parameters.find(key);
    return it == parameters.end() ? fallback : it->second;
  }
};

/// Time profile h(t) from a small expression set.
struct Profile {
  enum class Shape { kConstant, kLinear, kSine, kStep };

  Shape shape = Shape::kConstant;
  double amplitude = 1.0;
  double frequency = 1.0;
  double at = 0.0;

  static Profile from(const ModelSpec& spec, double default_amplitude) {
    Profile p;
    const std::string shape = spec.text("shape", "constant");
    if (shape == "constant") {
      p.shape = Shape::kConstant;
    } else if (shape == "linear") {
      p.shape = Shape::kLinear;
    } else if (shape == "sine") {
      p.shape = Shape::kSine;
    } else if (shape == "step") {
      p.shape = Shape::kStep;
    } else {
      throw ConfigurationError("unknown profile shape '" + shape + "' (constant, linear, sine, step)");
    }
    p.amplitude = spec.number("amplitude", default_amplitude);
    p.frequency = spec.number("frequency", 1.0);
    p.at = spec.number("at", 0.0);
    return p;
  }

  [[nodiscard]] double operator()(double t) const noexcept {
    switch (shape) {
      case Shape::kConstant:
        return amplitude;
      case Shape::kLinear:
        return amplitude * t;
      case Shape::kSine:
        return amplitude * std::sin(2.0 * std::numbers::pi * frequency * t);
      case Shape::kStep:
        return t >= at - 1e-12 ? amplitude : 0.0;
    }
    return 0.0;
  }

  [[nodiscard]] const char* shape_name() const noexcept {
    switch (shape) {
      case Shape::kConstant:
        return "constant";
      case Shape::kLinear:
        return "linear";
      case Shape::kSine:
        return "sine";
      case Shape::kStep:
        return "step";
    }
    return "?";
  }

  void describe(std::vector<std::pair<std::string, std::string>>& out) const {
    out.emplace_back("shape", shape_name());
    out.emplace_back("amplitude", format_number(amplitude));
    if (shape == Shape::kSine) {
      out.emplace_back("frequency", format_number(frequency));
    }
    if (shape == Shape::kStep) {
      out.emplace_back("at", format_number(at));
    }
  }
};

namespace models {

class Zero final : public DriftModel {
 public:
  explicit Zero(std::size_t dimension = 1) {
    info_ = {"zero", DriftKind::kExogenous, dimension, 0, false, true, {}};
  }
  const ModelInfo& info() const noexcept override { return info_; }
  void drift(std::size_t, const TimeGrid&, const Path&, const TrajectoryState&, std::span<double> out) const override {
    std::fill(out.begin(), out.end(), 0.0);
  }
  bool state_dependent(std::size_t, const TimeGrid&) const override { return false; }

 private:
  ModelInfo info_;
};

/// u'_t = h(t) in every coordinate.
class Deterministic final : public DriftModel {
 public:
  Deterministic(Profile h, std::size_t dimension = 1) : h_(h) {
    info_ = {"deterministic", DriftKind::kExogenous, dimension, 0, false, true, {}};
    h_.describe(info_.parameters);
  }
  const ModelInfo& info() const noexcept override { return info_; }
  const Profile& profile() const noexcept { return h_; }
  void drift(std::size_t k, const TimeGrid& grid, const Path&, const TrajectoryState&,
             std::span<double> out) const override {
    std::fill(out.begin(), out.end(), h_(grid.time(k)));
  }
  bool state_dependent(std::size_t, const TimeGrid&) const override { return false; }

 private:
  Profile h_;
  ModelInfo info_;
};

/// u'_t = -a U_t: a strong-solution feedback.
class LinearFeedback final : public DriftModel {
 public:
  LinearFeedback(double a, std::size_t dimension = 1) : a_(a) {
    if (!std::isfinite(a)) {
      throw ConfigurationError("linear-feedback gain must be finite");
    }
    info_ = {"linear-feedback", DriftKind::kFeedback, dimension, 0, false, true, {{"a", format_number(a)}}};
  }
  const ModelInfo& info() const noexcept override { return info_; }
  double gain() const noexcept { return a_; }
  void drift(std::size_t k, const TimeGrid&, const Path& observed, const TrajectoryState&,
             std::span<double> out) const override {
    for (std::size_t c = 0; c < out.size(); ++c) {
      out[c] = -a_ * observed(k, c);
    }
  }
  bool state_dependent(std::size_t, const TimeGrid&) const override { return false; }

 private:
  double a_;
  ModelInfo info_;
};

/// u'_k = c * sign(U_{t_k} - U_{t_{k-1}}), zero on the first step.
class SignFeedback final : public DriftModel {
 public:
  explicit SignFeedback(double c) : c_(c) {
    info_ = {"sign-feedback", DriftKind::kFeedback, 1, 0, false, true, {{"c", format_number(c)}}};
  }
  const ModelInfo& info() const noexcept override { return info_; }
  void drift(std::size_t k, const TimeGrid&, const Path& observed, const TrajectoryState&,
             std::span<double> out) const override {
    if (k == 0) {
      out[0] = 0.0;
      return;
    }
    const double inc = observed(k) - observed(k - 1);
    out[0] = inc > 0.0 ? c_ : (inc < 0.0 ? -c_ : 0.0);
  }
  bool state_dependent(std::size_t, const TimeGrid&) const override { return false; }

 private:
  double c_;
  ModelInfo info_;
};

/// Hidden Ornstein-Uhlenbeck signal dX = -beta X dt + sigma dV observed through u' = X.
class KalmanBucy final : public DriftModel {
 public:
  KalmanBucy(double beta, double sigma, double initial_variance) : beta_(beta), sigma_(sigma), p0_(initial_variance) {
    if (!(beta >= 0.0) || !(sigma > 0.0) || !(initial_variance >= 0.0)) {
      throw ConfigurationError("kalman-bucy needs beta >= 0, sigma > 0 and a nonnegative initial variance");
    }
    info_ = {"kalman-bucy", DriftKind::kHiddenSignal, 1, 0, true, false,
             {{"beta", format_number(beta)}, {"sigma", format_number(sigma)}, {"p0", format_number(initial_variance)}}};
  }
  KalmanBucy(double beta, double sigma) : KalmanBucy(beta, sigma, stationary_variance(beta, sigma)) {}

  /// sigma^2 / (2 beta), or 0 when beta = 0 (no stationary law; X_0 = 0).
  static double stationary_variance(double beta, double sigma) noexcept {
    return beta > 0.0 ? sigma * sigma / (2.0 * beta) : 0.0;
  }

  const ModelInfo& info() const noexcept override { return info_; }
  double beta() const noexcept { return beta_; }
  double sigma() const noexcept { return sigma_; }
  double initial_variance() const noexcept { return p0_; }

  TrajectoryState initial_state(std::mt19937_64&, std::mt19937_64& hidden) const override {
    std::normal_distribution<double> normal(0.0, std::sqrt(p0_));
    return {{}, {p0_ > 0.0 ? normal(hidden) : 0.0}, {}};
  }
  void drift(std::size_t, const TimeGrid&, const Path&, const TrajectoryState& state,
             std::span<double> out) const override {
    out[0] = state.hidden[0];
  }
  void advance(std::size_t, const TimeGrid& grid, std::span<const double>, std::span<const double>,
               TrajectoryState& state, std::mt19937_64& hidden) const override {
    const double dt = grid.step();
    std::normal_distribution<double> normal(0.0, std::sqrt(dt));
    double& x = state.hidden[0];
    x += -beta_ * x * dt + sigma_ * normal(hidden);
  }

 private:
  double beta_;
  double sigma_;
  double p0_;
  ModelInfo info_;
};

/// u'_t = theta * g(t) with theta ~ N(0, I) independent of B.
class Independent final : public DriftModel {
 public:
  Independent(Profile g, std::size_t dimension = 1) : g_(g) {
    info_ = {"independent", DriftKind::kExogenous, dimension, dimension, false, false, {}};
    g_.describe(info_.parameters);
  }
  const ModelInfo& info() const noexcept override { return info_; }
  const Profile& profile() const noexcept { return g_; }

  TrajectoryState initial_state(std::mt19937_64& aux, std::mt19937_64&) const override {
    std::normal_distribution<double> normal;
    TrajectoryState s;
    s.aux.resize(info_.dimension);
    for (double& x : s.aux) {
      x = normal(aux);
    }
    return s;
  }

  /// Finite law: theta uniform on `cardinality` equally spaced points in [-1, 1]
  /// per coordinate (the single point 0 when cardinality is 1).
  std::vector<TrajectoryState> finite_states(std::size_t cardinality) const override {
    if (cardinality == 0) {
      throw ConfigurationError("aux cardinality must be positive");
    }
    std::vector<double> values(cardinality, 0.0);
    for (std::size_t i = 0; i < cardinality && cardinality > 1; ++i) {
      values[i] = -1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(cardinality - 1);
    }
    std::vector<TrajectoryState> states(1);
    for (std::size_t c = 0; c < info_.dimension; ++c) {
      std::vector<TrajectoryState> next;
      for (const auto& s : states) {
        for (double v : values) {
          auto t = s;
          t.aux.push_back(v);
          next.push_back(std::move(t));
        }
      }
      states = std::move(next);
    }
    return states;
  }

  void drift(std::size_t k, const TimeGrid& grid, const Path&, const TrajectoryState& state,
             std::span<double> out) const override {
    const double g = g_(grid.time(k));
    for (std::size_t c = 0; c < out.size(); ++c) {
      out[c] = state.aux[c] * g;
    }
  }
  bool state_dependent(std::size_t k, const TimeGrid& grid) const override { return g_(grid.time(k)) != 0.0; }

 private:
  Profile g_;
  ModelInfo info_;
};

/// Truncated Tsirelson drift on geometric levels t_j = 2^{-(K-j)}, j = 0..K.
///
/// On [t_j, t_{j+1}) the drift is the fractional part of the slope of U over
/// the previous level interval [t_{j-1}, t_j] (with t_{-1} = 0); before t_0
/// it is an independent uniform seed.
class Tsirelson final : public DriftModel {
 public:
  explicit Tsirelson(std::size_t levels) : levels_(levels) {
    if (levels == 0) {
      throw ConfigurationError("tsirelson needs at least one level");
    }
    info_ = {"tsirelson", DriftKind::kFeedback, 1, 1, false, false, {{"K", std::to_string(levels)}}};
  }
  const ModelInfo& info() const noexcept override { return info_; }

  double level_time(std::size_t j) const noexcept {
    return std::ldexp(1.0, -static_cast<int>(levels_ - j));
  }

  void check_grid(const TimeGrid& grid) const override {
    for (std::size_t j = 0; j <= levels_; ++j) {
      if (level_time(j) <= grid.horizon() + 1e-12 && !grid.contains(level_time(j))) {
        throw ConfigurationError("tsirelson level time " + std::to_string(level_time(j)) +
                                 " is not a grid point; use a step count divisible by 2^K");
      }
    }
    if (level_time(levels_) > grid.horizon() + 1e-12) {
      throw ConfigurationError("tsirelson levels need horizon >= 1");
    }
  }

  TrajectoryState initial_state(std::mt19937_64& aux, std::mt19937_64&) const override {
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    return {{uniform(aux)}, {}, {}};
  }

  /// Finite law: the seed is uniform on the cell midpoints (i + 1/2) / cardinality.
  std::vector<TrajectoryState> finite_states(std::size_t cardinality) const override {
    if (cardinality == 0) {
      throw ConfigurationError("aux cardinality must be positive");
    }
    std::vector<TrajectoryState> states;
    for (std::size_t i = 0; i < cardinality; ++i) {
      states.push_back({{(static_cast<double>(i) + 0.5) / static_cast<double>(cardinality)}, {}, {}});
    }
    return states;
  }

  void drift(std::size_t k, const TimeGrid& grid, const Path& observed, const TrajectoryState& state,
             std::span<double> out) const override {
    const double t = grid.time(k);
    if (t < level_time(0) - 1e-12) {
      out[0] = frac(state.aux[0]);
      return;
    }
    std::size_t j = 0;
    while (j < levels_ && level_time(j + 1) <= t + 1e-12) {
      ++j;
    }
    const double left = j == 0 ? 0.0 : level_time(j - 1);
    const double right = level_time(j);
    std::size_t il = 0;
    std::size_t ir = 0;
    (void)grid.contains(left, &il);
    (void)grid.contains(right, &ir);
    out[0] = frac((observed(ir) - observed(il)) / (right - left));
  }

  bool state_dependent(std::size_t k, const TimeGrid& grid) const override {
    return grid.time(k) < level_time(0) - 1e-12;
  }

  static double frac(double x) noexcept {
    const double f = x - std::floor(x);
    return f >= 1.0 ? 0.0 : f;
  }

 private:
  std::size_t levels_;
  ModelInfo info_;
};

}  // namespace models

struct ParameterSpec {
  std::string name;
  std::string fallback;
  std::string meaning;
};

struct ModelDescriptor {
  std::string name;
  DriftKind kind;
  std::string summary;
  std::vector<ParameterSpec> parameters;
};

/// Built-in model catalogue.
[[nodiscard]] inline const std::vector<ModelDescriptor>& list_models() {
  static const std::vector<ModelDescriptor> registry = {
      {"zero", DriftKind::kExogenous, "u' = 0", {{"dimension", "1", "state dimension"}}},
      {"deterministic",
       DriftKind::kExogenous,
       "u'_t = h(t)",
       {{"shape", "constant", "constant | linear | sine | step"},
        {"amplitude", "1", "scale of h"},
        {"frequency", "1", "sine frequency"},
        {"at", "0", "step onset time"},
        {"dimension", "1", "state dimension"}}},
      {"linear-feedback",
       DriftKind::kFeedback,
       "u'_t = -a U_t",
       {{"a", "1", "feedback gain"}, {"dimension", "1", "state dimension"}}},
      {"sign-feedback", DriftKind::kFeedback, "u'_k = c sign(dU_{k-1})", {{"c", "1", "drift magnitude"}}},
      {"kalman-bucy",
       DriftKind::kHiddenSignal,
       "u'_t = X_t, dX = -beta X dt + sigma dV",
       {{"beta", "1", "mean reversion"},
        {"sigma", "1", "signal volatility"},
        {"p0", "sigma^2/(2 beta)", "initial variance of X"}}},
      {"independent",
       DriftKind::kExogenous,
       "u'_t = theta g(t), theta ~ N(0,1)",
       {{"shape", "constant", "constant | linear | sine | step"},
        {"amplitude", "1", "scale of g"},
        {"frequency", "1", "sine frequency"},
        {"at", "0", "step onset time"},
        {"dimension", "1", "state dimension"}}},
      {"tsirelson",
       DriftKind::kFeedback,
       "u' = frac(slope of U over the previous dyadic level)",
       {{"K", "8", "number of levels"}}},
  };
  return registry;
}

[[nodiscard]] inline std::shared_ptr<const DriftModel> make_model(const ModelSpec& spec) {
  const auto dimension = [&] {
    const double d = spec.number("dimension", 1.0);
    if (d < 1.0 || d != std::floor(d)) {
      throw ConfigurationError("model dimension must be a positive integer");
    }
    return static_cast<std::size_t>(d);
  };
  if (spec.name == "zero") {
    return std::make_shared<models::Zero>(dimension());
  }
  if (spec.name == "deterministic") {
    return std::make_shared<models::Deterministic>(Profile::from(spec, 1.0), dimension());
  }
  if (spec.name == "linear-feedback") {
    return std::make_shared<models::LinearFeedback>(spec.number("a", 1.0), dimension());
  }
  if (spec.name == "sign-feedback") {
    return std::make_shared<models::SignFeedback>(spec.number("c", 1.0));
  }
  if (spec.name == "kalman-bucy") {
    const double beta = spec.number("beta", 1.0);
    const double sigma = spec.number("sigma", 1.0);
    const double p0 = spec.number("p0", models::KalmanBucy::stationary_variance(beta, sigma));
    return std::make_shared<models::KalmanBucy>(beta, sigma, p0);
  }
  if (spec.name == "independent") {
    return std::make_shared<models::Independent>(Profile::from(spec, 1.0), dimension());
  }
  if (spec.name == "tsirelson") {
    const double k = spec.number("K", 8.0);
    if (k < 1.0 || k != std::floor(k) || k > 30.0) {
      throw ConfigurationError("tsirelson K must be an integer in [1, 30]");
    }
    return std::make_shared<models::Tsirelson>(static_cast<std::size_t>(k));
  }
  throw ConfigurationError("unknown model '" + spec.name + "' (see list-models)");
}

}  // namespace innolab
