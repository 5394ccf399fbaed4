#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "innolab/models/builtin.hpp"
#include "innolab/oracle/atoms.hpp"
#include "innolab/oracle/battery.hpp"
#include "innolab/oracle/crosscheck.hpp"
#include "innolab/oracle/exact_entropy.hpp"
#include "innolab/oracle/quantized_noise.hpp"
#include "innolab/oracle/random_systems.hpp"

using namespace innolab;
using namespace innolab::oracle;

namespace {

std::shared_ptr<const DriftModel> model(const std::string& name, std::map<std::string, std::string> params = {}) {
  return make_model(ModelSpec{name, std::move(params)});
}

}  // namespace

TEST(QuantizedNoise, GaussHermiteMatchesNormalMoments) {
  for (std::size_t m : {2u, 3u, 5u}) {
    const auto q = QuantizedNoise::gaussian(m);
    double moments[4] = {0.0, 0.0, 0.0, 0.0};
    for (std::size_t i = 0; i < q.size(); ++i) {
      const double x = q.node(i, 1.0);
      moments[0] += q.probabilities()[i] * x;
      moments[1] += q.probabilities()[i] * x * x;
      moments[2] += q.probabilities()[i] * x * x * x;
      moments[3] += q.probabilities()[i] * x * x * x * x;
    }
    EXPECT_NEAR(moments[0], 0.0, 1e-12);
    EXPECT_NEAR(moments[1], 1.0, 1e-12);
    EXPECT_NEAR(moments[2], 0.0, 1e-12);
    if (m >= 3) {
      EXPECT_NEAR(moments[3], 3.0, 1e-12);
    }
  }
}

TEST(QuantizedNoise, NodesScaleWithTheStep) {
  const auto q = QuantizedNoise::gaussian(2);
  EXPECT_NEAR(q.node(1, 0.25), 0.5, 1e-12);
  EXPECT_NEAR(q.node(0, 0.25), -0.5, 1e-12);
}

TEST(QuantizedNoise, RejectsBadLaws) {
  EXPECT_THROW(QuantizedNoise::gaussian(0), ConfigurationError);
  EXPECT_THROW(QuantizedNoise({0.0, 1.0}, {0.5, 0.6}), ConfigurationError);
  EXPECT_THROW(QuantizedNoise({0.0}, {0.0}), ConfigurationError);
}

TEST(Enumerate, ZeroDriftTwoNodesTwoSteps) {
  const auto space = enumerate(*model("zero"), TimeGrid(2), QuantizedNoise::gaussian(2));
  ASSERT_EQ(space.atoms.size(), 4u);
  for (const auto& a : space.atoms) {
    EXPECT_DOUBLE_EQ(a.probability, 0.25);
    EXPECT_EQ(a.observation, a.brownian);
  }
}

TEST(Enumerate, FeedbackFilterIsTheDrift) {
  const auto space = enumerate(*model("linear-feedback"), TimeGrid(3), QuantizedNoise::gaussian(3));
  EXPECT_EQ(space.atoms.size(), 27u);
  for (const auto& a : space.atoms) {
    for (std::size_t k = 0; k < 3; ++k) {
      EXPECT_NEAR(a.filtered(k), a.drift(k), 1e-12);
    }
  }
}

TEST(Enumerate, FilterStartsAtThePriorMean) {
  const auto space = enumerate(*model("independent"), TimeGrid(1), QuantizedNoise::gaussian(2), 2);
  ASSERT_EQ(space.atoms.size(), 4u);
  for (const auto& a : space.atoms) {
    EXPECT_EQ(a.filtered(0), 0.0);
  }
}

TEST(Enumerate, FilterIsTheConditionalMeanGivenTheObservation) {
  const auto space = enumerate(*model("independent"), TimeGrid(3), QuantizedNoise::gaussian(2), 3);
  // Tower property over all atoms: E[filtered_k] = E[drift_k].
  for (std::size_t k = 0; k < 3; ++k) {
    double lhs = 0.0;
    double rhs = 0.0;
    for (const auto& a : space.atoms) {
      lhs += a.probability * a.filtered(k);
      rhs += a.probability * a.drift(k);
    }
    EXPECT_NEAR(lhs, rhs, 1e-12);
  }
  for (const auto& a : space.atoms) {
    const auto along = space.exact_filter_along(a.observation);
    EXPECT_EQ(along, a.filtered);
  }
}

TEST(Enumerate, TooManyAtomsIsAConfigurationError) {
  EXPECT_EQ(atom_count(3, 13, 1), kMaxAtoms + 1);
  EXPECT_THROW((void)enumerate(*model("zero"), TimeGrid(13), QuantizedNoise::gaussian(3)), ConfigurationError);
}

TEST(ExactRelativeEntropy, Examples) {
  EXPECT_DOUBLE_EQ(exact_relative_entropy(std::vector<double>{1.0, 0.0}, std::vector<double>{0.5, 0.5}),
                   std::log(2.0));
  EXPECT_NEAR(exact_relative_entropy(std::vector<double>{0.25, 0.75}, std::vector<double>{0.5, 0.5}), 0.1308, 5e-5);
  EXPECT_EQ(exact_relative_entropy(std::vector<double>{0.3, 0.7}, std::vector<double>{0.3, 0.7}), 0.0);
}

TEST(ExactRelativeEntropy, MissingSupportIsAnAbsoluteContinuityError) {
  EXPECT_THROW((void)exact_relative_entropy(std::vector<double>{0.5, 0.5}, std::vector<double>{1.0, 0.0}),
               AbsoluteContinuityError);
  EXPECT_THROW((void)exact_relative_entropy(std::vector<double>{1.0}, std::vector<double>{0.5, 0.5}), ShapeError);
}

TEST(DpiVerdict, AdaptedFeedbackGivesEquality) {
  const auto inst = sign_feedback_instance();
  const auto v = dpi_verdict(enumerate(*inst.model, inst.grid, inst.noise, inst.aux_cardinality));
  EXPECT_TRUE(v.density_measurable);
  EXPECT_TRUE(v.dpi_equal);
  EXPECT_NEAR(v.dpi_gap(), 0.0, 1e-12);
  EXPECT_GT(v.path_entropy, 0.0);
  EXPECT_NEAR(v.drift_gap(), 0.0, 1e-12);
}

TEST(DpiVerdict, InformationErasingWitnessHasAStrictGap) {
  const auto inst = information_erasing_witness();
  const auto v = dpi_verdict(enumerate(*inst.model, inst.grid, inst.noise, inst.aux_cardinality));
  EXPECT_FALSE(v.density_measurable);
  EXPECT_FALSE(v.recoverable);
  EXPECT_FALSE(v.dpi_equal);
  EXPECT_GT(v.dpi_gap(), 1e-6);
  EXPECT_NEAR(v.observation_entropy, 0.0, 1e-12);
  EXPECT_NEAR(v.path_entropy, 0.198947, 1e-6);
  EXPECT_NEAR(v.energy, 0.25, 1e-12);
  EXPECT_NEAR(v.conditional_energy, 0.0, 1e-12);
}

TEST(DpiVerdict, InnovationLevelOfAnEulerChainHasNoGap) {
  const auto inst = information_erasing_witness();
  const auto v = dpi_verdict(enumerate(*inst.model, inst.grid, inst.noise, inst.aux_cardinality),
                             ObservationLevel::kInnovation);
  EXPECT_TRUE(v.dpi_equal);
  EXPECT_TRUE(v.recoverable);
}

TEST(RandomSystems, AreReproducible) {
  const auto a = random_system(7, 3);
  const auto b = random_system(7, 3);
  EXPECT_EQ(a.grid.steps(), b.grid.steps());
  EXPECT_EQ(a.noise.size(), b.noise.size());
  EXPECT_TRUE(a.aux_dependent);
  EXPECT_FALSE(random_system(7, 4).aux_dependent);
}

TEST(Battery, EveryInstancePassesWithBothOutcomes) {
  const auto result = run_battery();
  ASSERT_EQ(result.instances.size(), 100u);
  EXPECT_EQ(result.passed, 100u);
  EXPECT_GE(result.equal_cases, 10u);
  EXPECT_GE(result.strict_cases, 10u);
  for (const auto& c : result.instances) {
    EXPECT_LE(c.strong.observation_entropy, c.strong.path_entropy + 1e-12) << c.index;
    EXPECT_EQ(c.strong.dpi_equal, c.strong.density_measurable) << c.index;
    EXPECT_TRUE(!c.strong.recoverable || c.strong.density_measurable) << c.index;
    EXPECT_NEAR(c.probability_total, 1.0, 1e-12) << c.index;
  }
}

TEST(Crosscheck, ZeroDriftIsExactlyZero) {
  const auto space = enumerate(*model("zero"), TimeGrid(2), QuantizedNoise::gaussian(2));
  CriterionReport mc;
  const auto r = estimator_crosscheck(space, ObservationLevel::kInnovation, mc, {0.0, 0.0});
  EXPECT_EQ(r.exact_entropy, 0.0);
  EXPECT_EQ(r.exact_energy, 0.0);
  EXPECT_TRUE(r.pass);
}

TEST(Crosscheck, LargeErrorsFail) {
  const auto inst = information_erasing_witness();
  const auto space = enumerate(*inst.model, inst.grid, inst.noise, inst.aux_cardinality);
  CriterionReport mc;
  mc.entropy = {0.0, 0.0};
  mc.energy = {0.1, 0.0};
  const auto r = estimator_crosscheck(space, ObservationLevel::kStrong, mc);
  EXPECT_FALSE(r.pass);
  EXPECT_NEAR(r.energy_relative, 0.6, 1e-12);
}

TEST(Crosscheck, RejectsLocalizedReportsAndGridMismatch) {
  const auto space = enumerate(*model("zero"), TimeGrid(2), QuantizedNoise::gaussian(2));
  CriterionReport mc;
  mc.level = 1.0;
  EXPECT_THROW((void)estimator_crosscheck(space, ObservationLevel::kInnovation, mc), ConfigurationError);
  mc.level = kUnlocalized;
  EXPECT_THROW((void)estimator_crosscheck(space, ObservationLevel::kInnovation, mc, {0.0}), ConfigurationError);
}
