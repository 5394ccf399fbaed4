#pragma once

#include <cstddef>
#include <vector>

#include "innolab/core/grid.hpp"

namespace innolab {

enum class FilterMethod { kExactKalman, kParticle, kIdentityFeedback, kExactEnumeration };

[[nodiscard]] inline const char* to_string(FilterMethod m) noexcept {
  switch (m) {
    case FilterMethod::kExactKalman:
      return "exact-kalman";
    case FilterMethod::kParticle:
      return "particle";
    case FilterMethod::kIdentityFeedback:
      return "identity-feedback";
    case FilterMethod::kExactEnumeration:
      return "exact-enumeration";
  }
  return "?";
}

/// Estimate of E[u'_{t_k} | U_0..U_k]; row k uses observations up to t_k only.
struct FilterEstimate {
  AdaptedSamples values;
  FilterMethod method = FilterMethod::kIdentityFeedback;
  /// Zero for exact methods.
  std::size_t particles = 0;
  /// Effective sample size after each step's update; empty for exact methods.
  std::vector<double> ess;
};

}  // namespace innolab
