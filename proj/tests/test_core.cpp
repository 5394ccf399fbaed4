#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "innolab/core/errors.hpp"
#include "innolab/core/grid.hpp"
#include "innolab/core/parallel.hpp"
#include "innolab/core/random.hpp"
#include "innolab/core/stochastic.hpp"
#include "innolab/core/summation.hpp"

using namespace innolab;

namespace {

AdaptedSamples samples(const TimeGrid& grid, std::initializer_list<double> values) {
  AdaptedSamples s(grid, 1);
  std::size_t k = 0;
  for (double v : values) {
    s(k++) = v;
  }
  return s;
}

}  // namespace

TEST(TimeGrid, RejectsZeroSteps) { EXPECT_THROW(TimeGrid(0), ConfigurationError); }

TEST(TimeGrid, RejectsNonPositiveHorizon) {
  EXPECT_THROW(TimeGrid(4, 0.0), ConfigurationError);
  EXPECT_THROW(TimeGrid(4, -1.0), ConfigurationError);
  EXPECT_THROW(TimeGrid(4, std::nan("")), ConfigurationError);
}

TEST(TimeGrid, PointsAreStrictlyIncreasingAndEndAtHorizon) {
  const TimeGrid grid(7, 0.3);
  EXPECT_DOUBLE_EQ(grid.step(), 0.3 / 7);
  EXPECT_EQ(grid.time(0), 0.0);
  EXPECT_EQ(grid.time(7), 0.3);
  for (std::size_t k = 0; k < 7; ++k) {
    EXPECT_LT(grid.time(k), grid.time(k + 1));
  }
}

TEST(TimeGrid, ContainsFindsGridPoints) {
  const TimeGrid grid(8);
  std::size_t k = 99;
  EXPECT_TRUE(grid.contains(0.25, &k));
  EXPECT_EQ(k, 2u);
  EXPECT_FALSE(grid.contains(0.3));
  EXPECT_FALSE(grid.contains(1.5));
}

TEST(Path, StartsAtZeroWithOneRowPerGridPoint) {
  const Path p(TimeGrid(5), 3);
  EXPECT_EQ(p.points(), 6u);
  EXPECT_EQ(p.values().size(), 18u);
  for (double v : p.row(0)) {
    EXPECT_EQ(v, 0.0);
  }
}

TEST(AdaptedSamples, HasOneRowPerSubinterval) {
  const AdaptedSamples s(TimeGrid(5), 2);
  EXPECT_EQ(s.rows(), 5u);
  EXPECT_EQ(s.values().size(), 10u);
}

TEST(CompensatedSum, RecoversCancellingTerms) {
  CompensatedSum s;
  s += 1e16;
  s += 1.0;
  s += -1e16;
  EXPECT_EQ(s.value(), 1.0);
  const std::vector<double> v = {1.0, 1e100, 1.0, -1e100};
  EXPECT_EQ(fixed_order_sum(v), 2.0);
}

TEST(RandomStream, SameKeyGivesIdenticalPaths) {
  const TimeGrid grid(64);
  const Path a = sample_brownian(grid, 2, RandomStream(42, 7));
  const Path b = sample_brownian(grid, 2, RandomStream(42, 7));
  EXPECT_EQ(a, b);
}

TEST(RandomStream, DistinctSubstreamsAndLanesDiffer) {
  const TimeGrid grid(16);
  const Path a = sample_brownian(grid, 1, RandomStream(42, 7));
  EXPECT_NE(a, sample_brownian(grid, 1, RandomStream(42, 8)));
  EXPECT_NE(a, sample_brownian(grid, 1, RandomStream(43, 7)));
  EXPECT_NE(a, sample_brownian(grid, 1, RandomStream(42, 7, RandomStream::kAux)));
}

TEST(SampleBrownian, SingleStepStartsAtZero) {
  const Path p = sample_brownian(TimeGrid(1), 1, RandomStream(1, 0));
  EXPECT_EQ(p(0), 0.0);
  EXPECT_TRUE(std::isfinite(p(1)));
  EXPECT_NE(p(1), 0.0);
}

TEST(SampleBrownian, IncrementMomentsMatchTheGrid) {
  constexpr std::size_t kPaths = 100000;
  const TimeGrid grid(4);
  const double dt = grid.step();
  std::vector<CompensatedSum> sum(4);
  std::vector<CompensatedSum> sq(4);
  CompensatedSum terminal;
  for (std::size_t i = 0; i < kPaths; ++i) {
    const Path p = sample_brownian(grid, 1, RandomStream(2024, i));
    for (std::size_t k = 0; k < 4; ++k) {
      sum[k] += p.increment(k);
      sq[k] += p.increment(k) * p.increment(k);
    }
    terminal += p(4) * p(4);
  }
  const double m = static_cast<double>(kPaths);
  for (std::size_t k = 0; k < 4; ++k) {
    const double mean = sum[k].value() / m;
    const double var = sq[k].value() / m - mean * mean;
    EXPECT_LT(std::abs(mean), 4.0 * std::sqrt(dt / m));
    EXPECT_NEAR(var / dt, 1.0, 0.02);
  }
  EXPECT_NEAR(terminal.value() / m, 1.0, 0.02);
}

TEST(ItoIntegral, ZeroIntegrandGivesZero) {
  const TimeGrid grid(10);
  EXPECT_EQ(ito_integral(AdaptedSamples(grid, 1), sample_brownian(grid, 1, RandomStream(1, 1))), 0.0);
}

TEST(ItoIntegral, UnitIntegrandTelescopes) {
  const TimeGrid grid(50);
  const Path x = sample_brownian(grid, 1, RandomStream(3, 1));
  AdaptedSamples one(grid, 1);
  for (std::size_t k = 0; k < 50; ++k) {
    one(k) = 1.0;
  }
  EXPECT_NEAR(ito_integral(one, x), x(50) - x(0), 1e-13);
}

TEST(ItoIntegral, UsesLeftPointSum) {
  const TimeGrid grid(3);
  Path x(grid, 1);
  for (std::size_t k = 1; k <= 3; ++k) {
    x(k) = static_cast<double>(k);
  }
  EXPECT_EQ(ito_integral(samples(grid, {0, 1, 2}), x), 3.0);
}

TEST(ItoIntegral, GridMismatchIsAShapeError) {
  EXPECT_THROW((void)ito_integral(AdaptedSamples(TimeGrid(3), 1), Path(TimeGrid(4), 1)), ShapeError);
  EXPECT_THROW((void)ito_integral(AdaptedSamples(TimeGrid(3), 2), Path(TimeGrid(3), 1)), ShapeError);
}

TEST(ItoIntegral, IsLinearInTheIntegrand) {
  const TimeGrid grid(32);
  const Path x = sample_brownian(grid, 1, RandomStream(5, 0));
  const Path y = sample_brownian(grid, 1, RandomStream(5, 1));
  AdaptedSamples a(grid, 1);
  AdaptedSamples b(grid, 1);
  AdaptedSamples sum(grid, 1);
  for (std::size_t k = 0; k < 32; ++k) {
    a(k) = y(k);
    b(k) = std::sin(static_cast<double>(k));
    sum(k) = a(k) + b(k);
  }
  EXPECT_NEAR(ito_integral(sum, x), ito_integral(a, x) + ito_integral(b, x), 1e-14);
}

TEST(Energy, Examples) {
  const TimeGrid grid(2);
  EXPECT_EQ(energy(AdaptedSamples(grid, 1)), 0.0);
  EXPECT_EQ(energy(samples(grid, {1, 1})), 1.0);
  EXPECT_EQ(energy(samples(grid, {1, 2})), 2.5);
}

TEST(Energy, ScalesQuadratically) {
  const TimeGrid grid(16);
  AdaptedSamples u(grid, 2);
  AdaptedSamples cu(grid, 2);
  for (std::size_t k = 0; k < 16; ++k) {
    for (std::size_t c = 0; c < 2; ++c) {
      u(k, c) = 0.25 * static_cast<double>(k) - static_cast<double>(c);
      cu(k, c) = 2.0 * u(k, c);
    }
  }
  EXPECT_EQ(energy(cu), 4.0 * energy(u));
  EXPECT_GE(energy(u), 0.0);
}

TEST(Primitive, Examples) {
  const TimeGrid two(2);
  const Path p = primitive(samples(two, {2, -2}));
  EXPECT_EQ(p(0), 0.0);
  EXPECT_EQ(p(1), 1.0);
  EXPECT_EQ(p(2), 0.0);

  const TimeGrid grid(8);
  AdaptedSamples c(grid, 1);
  for (std::size_t k = 0; k < 8; ++k) {
    c(k) = 3.0;
  }
  const Path line = primitive(c);
  for (std::size_t k = 0; k <= 8; ++k) {
    EXPECT_NEAR(line(k), 3.0 * grid.time(k), 1e-15);
  }
  EXPECT_EQ(primitive(AdaptedSamples(grid, 1)), Path(grid, 1));
}

TEST(Primitive, DifferenceRecoversDriftTimesStep) {
  const TimeGrid grid(64);
  const Path b = sample_brownian(grid, 1, RandomStream(8, 8));
  AdaptedSamples u(grid, 1);
  for (std::size_t k = 0; k < 64; ++k) {
    u(k) = b(k);
  }
  const Path p = primitive(u);
  for (std::size_t k = 0; k < 64; ++k) {
    // Floating-point addition then subtraction is exact only to an ulp of the running sum.
    EXPECT_NEAR(p.increment(k), u(k) * grid.step(), 1e-15 * (1.0 + std::abs(p(k + 1))));
  }
}

TEST(ParallelFor, VisitsEveryIndexOnceForAnyWorkerCount) {
  for (std::size_t workers : {1u, 2u, 3u, 8u}) {
    std::vector<std::atomic<int>> hits(101);
    parallel_for(hits.size(), workers, [&](std::size_t i) { hits[i]++; });
    for (const auto& h : hits) {
      EXPECT_EQ(h.load(), 1);
    }
  }
}

TEST(ParallelFor, RethrowsWorkerExceptions) {
  EXPECT_THROW(parallel_for(10, 3,
                            [](std::size_t i) {
                              if (i == 7) {
                                throw NumericalError("boom");
                              }
                            }),
               NumericalError);
}

TEST(ParallelFor, BrownianEnsembleDoesNotDependOnWorkers) {
  const TimeGrid grid(32);
  auto run = [&](std::size_t workers) {
    std::vector<double> terminal(50);
    parallel_for(terminal.size(), workers,
                 [&](std::size_t i) { terminal[i] = sample_brownian(grid, 1, RandomStream(9, i))(32); });
    return terminal;
  };
  EXPECT_EQ(run(1), run(4));
}

TEST(Errors, InStageKeepsTypeAndNamesStage) {
  try {
    in_stage("filter", [] { throw DegeneracyError("collapsed"); });
    FAIL();
  } catch (const DegeneracyError& e) {
    EXPECT_NE(std::string(e.what()).find("stage 'filter'"), std::string::npos);
  }
}
