#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "innolab/criterion/estimators.hpp"
#include "innolab/girsanov/girsanov.hpp"

namespace innolab {

enum class Verdict { kEqualityConsistent, kPositiveGap, kInconclusive };

[[nodiscard]] inline const char* to_string(Verdict v) noexcept {
  switch (v) {
    case Verdict::kEqualityConsistent:
      return "EQUALITY-CONSISTENT";
    case Verdict::kPositiveGap:
      return "POSITIVE-GAP";
    case Verdict::kInconclusive:
      return "INCONCLUSIVE";
  }
  return "?";
}

struct VerdictThresholds {
  double se_multiplier = 3.0;
  /// Absolute floor in nats below which a gap counts as zero.
  double floor = 0.02;
};

/// Both sides of the criterion at one localization level.
struct CriterionReport {
  double level = kUnlocalized;
  Estimate entropy;
  Estimate energy;
  /// energy - entropy, with the SE of the per-member difference.
  Estimate gap;
  double effective_sample_size = 0.0;
  NormalizationDiagnostic normalization;
  /// Entropy of U's own law against energy of the raw drift, both under P.
  Estimate observation_entropy;
  Estimate observation_energy;
  Verdict verdict = Verdict::kInconclusive;
  std::string filter_method;
  std::string basis;
};

/// Equality needs the gap inside the floor and a run precise enough to
/// resolve the floor; a positive gap must clear both 3 SE and the floor.
[[nodiscard]] inline Verdict classify_gap(const Estimate& gap, const VerdictThresholds& t = {}) {
  const double band = t.se_multiplier * gap.standard_error;
  if (std::abs(gap.value) <= std::max(band, t.floor) && band <= t.floor) {
    return Verdict::kEqualityConsistent;
  }
  if (gap.value > band && gap.value > t.floor) {
    return Verdict::kPositiveGap;
  }
  return Verdict::kInconclusive;
}

struct AggregateVerdict {
  Verdict verdict = Verdict::kInconclusive;
  std::vector<Verdict> per_level;
};

[[nodiscard]] inline AggregateVerdict criterion_verdict(std::span<const CriterionReport> reports,
                                                        const VerdictThresholds& t = {}) {
  if (reports.empty()) {
    throw UsageError("criterion_verdict: need at least one localization level");
  }
  AggregateVerdict out;
  bool all_equal = true;
  bool any_positive = false;
  for (const auto& r : reports) {
    const Verdict v = classify_gap(r.gap, t);
    out.per_level.push_back(v);
    all_equal = all_equal && v == Verdict::kEqualityConsistent;
    any_positive = any_positive || v == Verdict::kPositiveGap;
  }
  out.verdict = all_equal ? Verdict::kEqualityConsistent
                          : (any_positive ? Verdict::kPositiveGap : Verdict::kInconclusive);
  return out;
}

}  // namespace innolab
