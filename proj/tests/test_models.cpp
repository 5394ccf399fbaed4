#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <string>

#include "innolab/core/stochastic.hpp"
#include "innolab/models/builtin.hpp"
#include "innolab/models/finite_aux.hpp"

using namespace innolab;

namespace {

std::shared_ptr<const DriftModel> model(const std::string& name, std::map<std::string, std::string> params = {}) {
  return make_model(ModelSpec{name, std::move(params)});
}

/// Replays the Euler recursion with prescribed Brownian increments.
Path drive(const DriftModel& m, const TimeGrid& grid, const std::vector<double>& db, AdaptedSamples& drift) {
  Path u(grid, 1);
  std::mt19937_64 eng(1);
  TrajectoryState state = m.initial_state(eng, eng);
  std::vector<double> inc(1);
  for (std::size_t k = 0; k < grid.steps(); ++k) {
    m.drift(k, grid, u, state, drift.row(k));
    inc[0] = drift(k) * grid.step() + db[k];
    u(k + 1) = u(k) + inc[0];
    m.advance(k, grid, inc, drift.row(k), state, eng);
  }
  return u;
}

}  // namespace

TEST(Registry, ListsTheBuiltInModels) {
  const auto& models = list_models();
  for (const char* name : {"zero", "kalman-bucy", "tsirelson", "deterministic", "linear-feedback", "independent"}) {
    EXPECT_TRUE(std::any_of(models.begin(), models.end(), [&](const ModelDescriptor& d) { return d.name == name; }))
        << name;
  }
}

TEST(Registry, EveryListedModelCanBeBuilt) {
  for (const auto& d : list_models()) {
    EXPECT_EQ(make_model(ModelSpec{d.name, {}})->info().name, d.name);
  }
}

TEST(Registry, RejectsUnknownModelsAndBadParameters) {
  EXPECT_THROW(model("nope"), ConfigurationError);
  EXPECT_THROW(model("kalman-bucy", {{"sigma", "0"}}), ConfigurationError);
  EXPECT_THROW(model("kalman-bucy", {{"beta", "-1"}}), ConfigurationError);
  EXPECT_THROW(model("tsirelson", {{"K", "0"}}), ConfigurationError);
  EXPECT_THROW(model("deterministic", {{"shape", "cubic"}}), ConfigurationError);
  EXPECT_THROW(model("deterministic", {{"amplitude", "abc"}}), ConfigurationError);
  EXPECT_THROW(model("zero", {{"dimension", "0"}}), ConfigurationError);
}

TEST(Simulate, ZeroDriftGivesUEqualB) {
  const TimeGrid grid(64);
  const auto out = simulate(*model("zero"), grid, RandomStream(1, 0));
  EXPECT_EQ(out.observation, out.brownian);
}

TEST(Simulate, UnitDriftShiftsByTime) {
  const TimeGrid grid(64);
  const auto out = simulate(*model("deterministic"), grid, RandomStream(1, 0));
  for (std::size_t k = 0; k <= 64; ++k) {
    EXPECT_NEAR(out.observation(k), out.brownian(k) + grid.time(k), 1e-12);
  }
}

TEST(Simulate, LinearFeedbackTwoStepHandComputation) {
  const TimeGrid grid(2);
  AdaptedSamples drift(grid, 1);
  const Path u = drive(*model("linear-feedback", {{"a", "1"}}), grid, {1.0, 1.0}, drift);
  EXPECT_EQ(drift(0), 0.0);
  EXPECT_EQ(u(1), 1.0);
  EXPECT_EQ(drift(1), -1.0);
  EXPECT_EQ(u(2), 1.5);
}

TEST(Simulate, IncrementIdentityHoldsForEveryModel) {
  const TimeGrid grid(256);
  for (const auto& d : list_models()) {
    const auto m = make_model(ModelSpec{d.name, {}});
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      const auto out = simulate(*m, grid, RandomStream(seed, 11));
      for (std::size_t k = 0; k < grid.steps(); ++k) {
        const double lhs = out.observation.increment(k);
        const double rhs = out.drift(k) * grid.step() + out.brownian.increment(k);
        EXPECT_NEAR(lhs, rhs, 1e-12) << d.name;
      }
    }
  }
}

TEST(Simulate, IsAPureFunctionOfTheStream) {
  const TimeGrid grid(256);
  for (const char* name : {"kalman-bucy", "independent", "tsirelson"}) {
    const auto m = model(name);
    const auto a = simulate(*m, grid, RandomStream(5, 3));
    const auto b = simulate(*m, grid, RandomStream(5, 3));
    EXPECT_EQ(a.observation, b.observation);
    EXPECT_EQ(a.drift, b.drift);
    EXPECT_EQ(a.aux, b.aux);
  }
}

TEST(Simulate, ExogenousDriftIgnoresTheObservedHistory) {
  const TimeGrid grid(16);
  const auto m = model("independent", {{"shape", "sine"}});
  std::mt19937_64 eng(4);
  const TrajectoryState state = m->initial_state(eng, eng);
  Path a(grid, 1);
  Path b(grid, 1);
  for (std::size_t k = 1; k <= 16; ++k) {
    b(k) = std::cos(static_cast<double>(k)) * 10.0;
  }
  for (std::size_t k = 0; k < 16; ++k) {
    double ua = 0.0;
    double ub = 0.0;
    m->drift(k, grid, a, state, {&ua, 1});
    m->drift(k, grid, b, state, {&ub, 1});
    EXPECT_EQ(ua, ub);
  }
}

TEST(Tsirelson, RejectsGridsMissingLevelTimes) {
  EXPECT_THROW((void)simulate(*model("tsirelson", {{"K", "3"}}), TimeGrid(4), RandomStream(1, 0)),
               ConfigurationError);
  EXPECT_NO_THROW((void)simulate(*model("tsirelson", {{"K", "3"}}), TimeGrid(8), RandomStream(1, 0)));
}

TEST(Tsirelson, DriftStaysInUnitInterval) {
  const TimeGrid grid(256);
  const auto m = model("tsirelson", {{"K", "8"}});
  for (std::uint64_t i = 0; i < 200; ++i) {
    const auto out = simulate(*m, grid, RandomStream(77, i));
    for (double v : out.drift.values()) {
      EXPECT_GE(v, 0.0);
      EXPECT_LT(v, 1.0);
    }
  }
}

TEST(Tsirelson, SeedDrivesTheFirstLevelAndSlopesTheRest) {
  const TimeGrid grid(8);
  const models::Tsirelson m(2);  // t_0 = 1/4, t_1 = 1/2, t_2 = 1
  const auto out = simulate(m, grid, RandomStream(3, 0));
  EXPECT_EQ(out.drift(0), models::Tsirelson::frac(out.aux[0]));
  EXPECT_EQ(out.drift(1), out.drift(0));
  // On [t_0, t_1): slope over [0, t_0].
  EXPECT_DOUBLE_EQ(out.drift(2), models::Tsirelson::frac(out.observation(2) / 0.25));
  // On [t_1, t_2): slope over [t_0, t_1].
  EXPECT_DOUBLE_EQ(out.drift(5), models::Tsirelson::frac((out.observation(4) - out.observation(2)) / 0.25));
}

TEST(Tsirelson, FracIsInUnitInterval) {
  EXPECT_EQ(models::Tsirelson::frac(2.25), 0.25);
  EXPECT_EQ(models::Tsirelson::frac(-0.25), 0.75);
  EXPECT_LT(models::Tsirelson::frac(-1e-18), 1.0);
}

TEST(KalmanBucy, HiddenSignalIsIndependentOfB) {
  constexpr std::size_t kPaths = 4000;
  const TimeGrid grid(32);
  const auto m = model("kalman-bucy");
  CompensatedSum xy;
  CompensatedSum xx;
  CompensatedSum yy;
  for (std::size_t i = 0; i < kPaths; ++i) {
    const auto out = simulate(*m, grid, RandomStream(12, i));
    // Increments of the hidden signal X = drift record.
    const double dx = out.drift(31) - out.drift(0);
    const double db = out.brownian(31) - out.brownian(0);
    xy += dx * db;
    xx += dx * dx;
    yy += db * db;
  }
  const double corr = xy.value() / std::sqrt(xx.value() * yy.value());
  EXPECT_LT(std::abs(corr), 4.0 / std::sqrt(static_cast<double>(kPaths)));
}

TEST(KalmanBucy, StationaryVariance) {
  EXPECT_EQ(models::KalmanBucy::stationary_variance(1.0, 1.0), 0.5);
  EXPECT_EQ(models::KalmanBucy::stationary_variance(0.0, 1.0), 0.0);
}

TEST(Independent, FiniteStatesSpanTheUnitInterval) {
  const models::Independent m(Profile{}, 2);
  const auto states = m.finite_states(3);
  ASSERT_EQ(states.size(), 9u);
  EXPECT_EQ(states.front().aux, (std::vector<double>{-1.0, -1.0}));
  EXPECT_EQ(states.back().aux, (std::vector<double>{1.0, 1.0}));
  EXPECT_EQ(m.finite_states(1).front().aux, (std::vector<double>{0.0, 0.0}));
}

TEST(FiniteAux, DrawsOnlyFiniteStates) {
  auto wrapped = std::make_shared<FiniteAuxModel>(model("independent"), 2);
  for (std::uint64_t i = 0; i < 20; ++i) {
    const auto out = simulate(*wrapped, TimeGrid(4), RandomStream(1, i));
    EXPECT_TRUE(out.aux[0] == -1.0 || out.aux[0] == 1.0);
  }
}

TEST(FiniteAux, HiddenSignalModelsHaveNoFiniteLaw) {
  EXPECT_THROW(FiniteAuxModel(model("kalman-bucy"), 2), UnsupportedModelError);
}

TEST(Profile, Shapes) {
  EXPECT_EQ(Profile::from(ModelSpec{"x", {{"shape", "linear"}, {"amplitude", "2"}}}, 1.0)(0.5), 1.0);
  EXPECT_NEAR(Profile::from(ModelSpec{"x", {{"shape", "sine"}}}, 1.0)(0.25), 1.0, 1e-15);
  const auto step = Profile::from(ModelSpec{"x", {{"shape", "step"}, {"at", "0.5"}}}, 1.0);
  EXPECT_EQ(step(0.25), 0.0);
  EXPECT_EQ(step(0.5), 1.0);
}
