#pragma once

#include <Eigen/Dense>

#include <cmath>

#include "innolab/core/errors.hpp"
#include "innolab/filtering/kalman_bucy.hpp"
#include "innolab/models/builtin.hpp"

namespace innolab {

/// Law of the innovation increments dZ_0..dZ_{N-1} of one coordinate under nu.
struct GaussianPathLaw {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
  /// Number of identical independent coordinates the law describes.
  std::size_t coordinates = 1;
};

/// Filtered drift of a linear model written as u-hat_k = offset_k + sum_{j<k} gain_kj dU_j.
struct LinearFilteredDrift {
  Eigen::VectorXd offset;
  Eigen::MatrixXd gain;
  std::size_t coordinates = 1;
};

[[nodiscard]] inline LinearFilteredDrift linear_filtered_drift(const DriftModel& model, const TimeGrid& grid) {
  const auto n = static_cast<Eigen::Index>(grid.steps());
  const double dt = grid.step();
  LinearFilteredDrift rep{Eigen::VectorXd::Zero(n), Eigen::MatrixXd::Zero(n, n), model.info().dimension};

  if (dynamic_cast<const models::Zero*>(&model) != nullptr) {
    return rep;
  }
  if (const auto* det = dynamic_cast<const models::Deterministic*>(&model)) {
    for (Eigen::Index k = 0; k < n; ++k) {
      rep.offset(k) = det->profile()(grid.time(static_cast<std::size_t>(k)));
    }
    return rep;
  }
  if (const auto* lf = dynamic_cast<const models::LinearFeedback*>(&model)) {
    for (Eigen::Index k = 0; k < n; ++k) {
      rep.gain.row(k).head(k).setConstant(-lf->gain());
    }
    return rep;
  }
  if (const auto* kb = dynamic_cast<const models::KalmanBucy*>(&model)) {
    const auto p = riccati_variances(grid, kb->beta(), kb->sigma(), kb->initial_variance());
    for (Eigen::Index k = 0; k + 1 < n; ++k) {
      const double pk = p[static_cast<std::size_t>(k)];
      rep.gain.row(k + 1) = (1.0 - (kb->beta() + pk) * dt) * rep.gain.row(k);
      rep.gain(k + 1, k) += pk;
    }
    return rep;
  }
  if (const auto* ind = dynamic_cast<const models::Independent*>(&model)) {
    // Conjugate Gaussian posterior mean of theta given dU_0..dU_{k-1}.
    double precision = 1.0;
    Eigen::RowVectorXd numerator = Eigen::RowVectorXd::Zero(n);
    for (Eigen::Index k = 0; k < n; ++k) {
      const double g = ind->profile()(grid.time(static_cast<std::size_t>(k)));
      rep.gain.row(k) = g * numerator / precision;
      numerator(k) = g;
      precision += g * g * dt;
    }
    return rep;
  }
  throw UnsupportedModelError("gaussian_path_kl: model '" + model.info().name + "' is not linear-Gaussian");
}

/// Under nu the observation increments are i.i.d. N(0, dt), so
/// dZ = (I - dt G) dU - dt offset is Gaussian.
[[nodiscard]] inline GaussianPathLaw gaussian_path_law(const DriftModel& model, const TimeGrid& grid) {
  const auto rep = linear_filtered_drift(model, grid);
  const double dt = grid.step();
  const auto n = static_cast<Eigen::Index>(grid.steps());
  const Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n) - dt * rep.gain;
  return {-dt * rep.offset, dt * a * a.transpose(), rep.coordinates};
}

/// Relative entropy of a Gaussian increment law against i.i.d. N(0, dt) increments.
[[nodiscard]] inline double gaussian_kl_to_reference(const GaussianPathLaw& law, double dt) {
  const Eigen::Index n = law.mean.size();
  const Eigen::MatrixXd scaled = law.covariance / dt;
  Eigen::LLT<Eigen::MatrixXd> chol(scaled);
  if (chol.info() != Eigen::Success) {
    throw NumericalError("gaussian_path_kl: covariance is not positive definite");
  }
  const Eigen::MatrixXd l = chol.matrixL();
  const double log_det = 2.0 * l.diagonal().array().log().sum();
  const double kl = 0.5 * (scaled.trace() - static_cast<double>(n) - log_det + law.mean.squaredNorm() / dt);
  return kl * static_cast<double>(law.coordinates);
}

/// Exact H(Z(nu) | reference) for the linear-Gaussian models.
[[nodiscard]] inline double gaussian_path_kl(const DriftModel& model, const TimeGrid& grid) {
  return gaussian_kl_to_reference(gaussian_path_law(model, grid), grid.step());
}

}  // namespace innolab
