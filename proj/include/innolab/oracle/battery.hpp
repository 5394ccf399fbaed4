#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "innolab/core/summation.hpp"
#include "innolab/oracle/atoms.hpp"
#include "innolab/oracle/exact_entropy.hpp"
#include "innolab/oracle/random_systems.hpp"

namespace innolab::oracle {

/// Outcome of the exact checks on one random instance.
struct InstanceCheck {
  std::size_t index = 0;
  DiscreteVerdict strong;
  DiscreteVerdict innovation;
  double probability_total = 0.0;
  /// H(Z(nu)|Z(P)) <= H(nu|P) + 1e-12 at both levels.
  bool dpi_holds = false;
  /// Equality iff the density is constant on observation classes, at both levels.
  bool equivalence_holds = false;
  /// Recoverability implies measurability, at both levels.
  bool recoverability_consistent = false;
  /// Entropies are nonnegative.
  bool nonnegative = false;
  bool probabilities_normalized = false;
  /// Monte Carlo target ordering: conditional energy <= energy.
  bool inequality_holds = false;

  [[nodiscard]] bool pass() const noexcept {
    return dpi_holds && equivalence_holds && recoverability_consistent && nonnegative && probabilities_normalized &&
           inequality_holds;
  }
};

[[nodiscard]] inline InstanceCheck check_instance(const DiscreteInstance& inst, std::size_t index = 0) {
  const AtomSpace space = enumerate(*inst.model, inst.grid, inst.noise, inst.aux_cardinality);
  InstanceCheck out;
  out.index = index;
  out.strong = dpi_verdict(space, ObservationLevel::kStrong);
  out.innovation = dpi_verdict(space, ObservationLevel::kInnovation);
  CompensatedSum total;
  for (const auto& a : space.atoms) {
    total += a.probability;
  }
  out.probability_total = total.value();
  out.probabilities_normalized = std::abs(out.probability_total - 1.0) <= 1e-12;
  out.dpi_holds = true;
  out.equivalence_holds = true;
  out.recoverability_consistent = true;
  out.nonnegative = true;
  out.inequality_holds = true;
  for (const auto* v : {&out.strong, &out.innovation}) {
    out.dpi_holds = out.dpi_holds && v->observation_entropy <= v->path_entropy + 1e-12;
    out.equivalence_holds = out.equivalence_holds && (v->dpi_equal == v->density_measurable);
    out.recoverability_consistent = out.recoverability_consistent && (!v->recoverable || v->density_measurable);
    out.nonnegative = out.nonnegative && v->path_entropy >= -1e-12 && v->observation_entropy >= -1e-12;
    out.inequality_holds = out.inequality_holds && v->conditional_energy <= v->energy + 1e-12;
  }
  return out;
}

struct BatteryResult {
  std::vector<InstanceCheck> instances;
  std::size_t passed = 0;
  /// Strong-level instances with equality / with a strict gap.
  std::size_t equal_cases = 0;
  std::size_t strict_cases = 0;
};

/// The randomized discrete battery (default 100 instances).
[[nodiscard]] inline BatteryResult run_battery(std::uint64_t seed = 2024, std::size_t count = 100) {
  BatteryResult out;
  for (std::size_t i = 0; i < count; ++i) {
    out.instances.push_back(check_instance(random_system(seed, i), i));
    const auto& c = out.instances.back();
    out.passed += c.pass() ? 1 : 0;
    (c.strong.dpi_equal ? out.equal_cases : out.strict_cases) += 1;
  }
  return out;
}

}  // namespace innolab::oracle
