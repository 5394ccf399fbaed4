#pragma once

#include "innolab/core/errors.hpp"
#include "innolab/core/stochastic.hpp"
#include "innolab/filtering/filter_estimate.hpp"

namespace innolab {

/// The drift record itself: E[u' | U] = u' when u' is a functional of U.
[[nodiscard]] inline FilterEstimate identity_feedback(const AdaptedSamples& record) {
  return {record, FilterMethod::kIdentityFeedback, 0, {}};
}

/// Innovation Z = U - int filtered ds.
[[nodiscard]] inline Path innovation(const Path& observation, const FilterEstimate& filtered) {
  require_same_shape(observation, filtered.values, "innovation");
  const Path drift_part = primitive(filtered.values);
  Path z(observation.grid(), observation.dimension());
  for (std::size_t k = 1; k < observation.points(); ++k) {
    for (std::size_t c = 0; c < observation.dimension(); ++c) {
      z(k, c) = observation(k, c) - drift_part(k, c);
    }
  }
  return z;
}

}  // namespace innolab
