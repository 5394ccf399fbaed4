#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "innolab/core/errors.hpp"
#include "innolab/core/stochastic.hpp"
#include "innolab/core/summation.hpp"
#include "innolab/filtering/filter_estimate.hpp"

namespace innolab {

inline constexpr double kUnlocalized = std::numeric_limits<double>::infinity();

/// Which drift is removed and which process is observed.
///
/// kInnovation: the filtered drift E_P[u'|U] against the innovation Z.
/// kStrong: the raw drift u' against the driving noise B; equality then holds
/// iff U generates the same information as B (a strong solution).
enum class ObservationLevel { kInnovation, kStrong };

[[nodiscard]] inline const char* to_string(ObservationLevel level) noexcept {
  return level == ObservationLevel::kInnovation ? "innovation" : "strong";
}

/// T_n: the first grid index k with sum_{j<k} |u_j|^2 dt > n, or N.
struct StoppingRule {
  double threshold = kUnlocalized;

  [[nodiscard]] std::size_t stopping_index(const AdaptedSamples& drift) const {
    const double dt = drift.grid().step();
    CompensatedSum cumulative;
    for (std::size_t k = 0; k < drift.rows(); ++k) {
      if (cumulative.value() > threshold) {
        return k;
      }
      for (double v : drift.row(k)) {
        cumulative += v * v * dt;
      }
    }
    return drift.rows();
  }
};

/// Freezes the filtered drift's primitive at T_n: rows from the stopping index on are zero.
[[nodiscard]] inline FilterEstimate localize(const FilterEstimate& filtered, const StoppingRule& rule) {
  FilterEstimate out = filtered;
  const std::size_t stop = rule.stopping_index(filtered.values);
  for (std::size_t k = stop; k < out.values.rows(); ++k) {
    for (double& v : out.values.row(k)) {
      v = 0.0;
    }
  }
  return out;
}

struct LogWeight {
  double value = 0.0;
  double level = kUnlocalized;
};

/// log rho = -sum <u_k, dZ_k> - 1/2 sum |u_k|^2 dt.
[[nodiscard]] inline LogWeight girsanov_log_weight(const AdaptedSamples& filtered, const Path& innovation,
                                                   double level = kUnlocalized) {
  const double value = -ito_integral(filtered, innovation) - 0.5 * energy(filtered);
  if (!std::isfinite(value)) {
    throw NumericalError("girsanov_log_weight: non-finite log-weight");
  }
  return {value, level};
}

/// Monte Carlo check of E_P[rho] = 1.
struct NormalizationDiagnostic {
  double mean = 0.0;
  double standard_error = 0.0;
  bool pass = false;
};

[[nodiscard]] inline NormalizationDiagnostic normalization_diagnostic(std::span<const double> log_weights) {
  if (log_weights.size() < 100) {
    throw UsageError("normalization_diagnostic: need at least 100 log-weights");
  }
  const auto m = static_cast<double>(log_weights.size());
  CompensatedSum sum;
  for (double l : log_weights) {
    sum += std::exp(l);
  }
  const double mean = sum.value() / m;
  CompensatedSum sq;
  for (double l : log_weights) {
    const double dev = std::exp(l) - mean;
    sq += dev * dev;
  }
  const double se = std::sqrt(sq.value() / (m - 1.0) / m);
  const bool pass = std::isfinite(mean) && std::abs(mean - 1.0) <= 3.0 * se;
  return {mean, se, pass};
}

/// Self-normalized importance weights of an ensemble (indexed like the ensemble).
struct WeightedEnsemble {
  std::vector<double> log_weights;
  std::vector<double> weights;
  double effective_sample_size = 0.0;

  [[nodiscard]] std::size_t size() const noexcept { return weights.size(); }
};

/// w_i = exp(l_i - max l) / sum_j exp(l_j - max l).
[[nodiscard]] inline WeightedEnsemble reweight(std::span<const double> log_weights) {
  if (log_weights.size() < 2) {
    throw UsageError("reweight: need at least two members");
  }
  double top = -std::numeric_limits<double>::infinity();
  for (double l : log_weights) {
    if (std::isnan(l) || l == std::numeric_limits<double>::infinity()) {
      throw NumericalError("reweight: log-weights must be finite or -inf");
    }
    top = std::max(top, l);
  }
  if (top == -std::numeric_limits<double>::infinity()) {
    throw DegeneracyError("reweight: every log-weight is -inf");
  }
  WeightedEnsemble out;
  out.log_weights.assign(log_weights.begin(), log_weights.end());
  out.weights.resize(log_weights.size());
  CompensatedSum total;
  for (std::size_t i = 0; i < log_weights.size(); ++i) {
    out.weights[i] = std::exp(log_weights[i] - top);
    total += out.weights[i];
  }
  const double norm = total.value();
  CompensatedSum squares;
  for (double& w : out.weights) {
    w /= norm;
    squares += w * w;
  }
  out.effective_sample_size = 1.0 / squares.value();
  return out;
}

}  // namespace innolab
