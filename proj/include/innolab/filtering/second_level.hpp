#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "innolab/core/errors.hpp"
#include "innolab/core/grid.hpp"

namespace innolab {

/// Features of the innovation history used to approximate E_nu[. | Z_0..Z_k].
struct BasisSpec {
  enum class Kind {
    /// Constant, the last `window` increments, the current level, exponentially
    /// discounted integrals at `rates`, and (optionally) their squares.
    kPolynomial,
    /// One indicator per distinct history Z_0..Z_k (values rounded to 12
    /// decimals). Exact for finitely many histories.
    kCells,
  };

  Kind kind = Kind::kPolynomial;
  std::size_t window = 8;
  std::vector<double> rates = {0.5, 1.0, 2.0, 4.0, 8.0};
  bool squares = true;
  /// Ridge on standardized, centered features; the intercept is not penalized.
  double ridge = 1e-8;
};

struct SecondLevelFit {
  std::size_t step = 0;
  std::string features;
  /// Intercepts (d) followed by slopes (p x d, column-major per coordinate) on
  /// standardized features, or per-cell means for the cell basis.
  std::vector<double> coefficients;
  /// Fitted conditional drift per member, row-major M x d.
  std::vector<double> fitted;
  std::size_t dimension = 1;

  [[nodiscard]] double value(std::size_t member, std::size_t c = 0) const { return fitted[member * dimension + c]; }
};

/// Walks the innovation histories of an ensemble forward in time and exposes
/// the feature matrix at the current step.
class HistoryFeatures {
 public:
  HistoryFeatures(std::span<const Path> histories, BasisSpec basis)
      : histories_(histories), basis_(std::move(basis)) {
    if (histories_.empty()) {
      throw UsageError("HistoryFeatures: empty ensemble");
    }
    dimension_ = histories_.front().dimension();
    for (const auto& h : histories_) {
      require_same_shape(h, histories_.front(), "HistoryFeatures");
    }
    discounted_.assign(histories_.size() * basis_.rates.size() * dimension_, 0.0);
    if (basis_.kind == BasisSpec::Kind::kCells) {
      prefixes_.assign(histories_.size(), {});
      for (std::size_t i = 0; i < histories_.size(); ++i) {
        append_key(i, 0);
      }
    }
  }

  [[nodiscard]] std::size_t step() const noexcept { return step_; }
  [[nodiscard]] std::size_t members() const noexcept { return histories_.size(); }

  /// Moves the feature state from step k to k + 1.
  void advance() {
    const TimeGrid& grid = histories_.front().grid();
    if (step_ >= grid.steps()) {
      throw UsageError("HistoryFeatures: already at the final step");
    }
    const double dt = grid.step();
    const std::size_t r = basis_.rates.size();
    for (std::size_t i = 0; i < histories_.size(); ++i) {
      for (std::size_t q = 0; q < r; ++q) {
        const double decay = 1.0 - basis_.rates[q] * dt;
        for (std::size_t c = 0; c < dimension_; ++c) {
          double& e = discounted_[(i * r + q) * dimension_ + c];
          e = decay * e + histories_[i].increment(step_, c);
        }
      }
    }
    ++step_;
    if (basis_.kind == BasisSpec::Kind::kCells) {
      for (std::size_t i = 0; i < histories_.size(); ++i) {
        append_key(i, step_);
      }
    }
  }

  /// Raw (uncentered) polynomial features at the current step, M x p.
  [[nodiscard]] Eigen::MatrixXd polynomial() const {
    const std::size_t lags = std::min(step_, basis_.window);
    const std::size_t r = basis_.rates.size();
    const std::size_t linear = dimension_ * (lags + 1 + r);
    const std::size_t p = basis_.squares ? 2 * linear : linear;
    Eigen::MatrixXd x(static_cast<Eigen::Index>(histories_.size()), static_cast<Eigen::Index>(p));
    for (std::size_t i = 0; i < histories_.size(); ++i) {
      const auto row = static_cast<Eigen::Index>(i);
      Eigen::Index col = 0;
      const Path& z = histories_[i];
      for (std::size_t c = 0; c < dimension_; ++c) {
        for (std::size_t l = 1; l <= lags; ++l) {
          x(row, col++) = z.increment(step_ - l, c);
        }
        x(row, col++) = z(step_, c);
        for (std::size_t q = 0; q < r; ++q) {
          x(row, col++) = discounted_[(i * r + q) * dimension_ + c];
        }
      }
      if (basis_.squares) {
        for (std::size_t j = 0; j < linear; ++j) {
          const double v = x(row, static_cast<Eigen::Index>(j));
          x(row, col++) = v * v;
        }
      }
    }
    return x;
  }

  /// Cell index of each member at the current step, and the number of cells.
  [[nodiscard]] std::pair<std::vector<std::size_t>, std::size_t> cells() const {
    std::map<std::vector<std::int64_t>, std::size_t> index;
    std::vector<std::size_t> ids(histories_.size());
    for (std::size_t i = 0; i < histories_.size(); ++i) {
      ids[i] = index.try_emplace(prefixes_[i], index.size()).first->second;
    }
    return {std::move(ids), index.size()};
  }

  [[nodiscard]] std::string describe() const {
    std::ostringstream os;
    if (basis_.kind == BasisSpec::Kind::kCells) {
      os << "cells(Z_0..Z_" << step_ << ")";
      return os.str();
    }
    os << "1, dZ[last " << std::min(step_, basis_.window) << "], Z_k";
    for (double rate : basis_.rates) {
      os << ", disc(" << rate << ")";
    }
    if (basis_.squares) {
      os << ", squares";
    }
    return os.str();
  }

  [[nodiscard]] const BasisSpec& basis() const noexcept { return basis_; }

 private:
  void append_key(std::size_t i, std::size_t k) {
    for (std::size_t c = 0; c < dimension_; ++c) {
      prefixes_[i].push_back(std::llround(histories_[i](k, c) * 1e12));
    }
  }

  std::span<const Path> histories_;
  BasisSpec basis_;
  std::size_t dimension_ = 1;
  std::size_t step_ = 0;
  std::vector<double> discounted_;
  std::vector<std::vector<std::int64_t>> prefixes_;
};

namespace detail {

inline Eigen::VectorXd checked_weights(std::span<const double> weights) {
  Eigen::VectorXd w(static_cast<Eigen::Index>(weights.size()));
  double total = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (!(weights[i] >= 0.0) || !std::isfinite(weights[i])) {
      throw DegeneracyError("second-level regression: weights must be finite and nonnegative");
    }
    w(static_cast<Eigen::Index>(i)) = weights[i];
    total += weights[i];
  }
  if (!(total > 0.0)) {
    throw DegeneracyError("second-level regression: all weights are zero");
  }
  return w / total;
}

}  // namespace detail

/// Weighted ridge least squares of targets (M x d) on features (M x p) with an
/// unpenalized intercept. Features are centered and scaled under the weights,
/// so the fit preserves weighted means exactly and never inflates the weighted
/// second moment.
[[nodiscard]] inline SecondLevelFit weighted_projection(const Eigen::MatrixXd& features, const Eigen::MatrixXd& targets,
                                                        std::span<const double> weights, double ridge) {
  const Eigen::Index m = targets.rows();
  const Eigen::Index d = targets.cols();
  if (features.rows() != m || static_cast<Eigen::Index>(weights.size()) != m) {
    throw ShapeError("weighted_projection: row count mismatch");
  }
  const Eigen::VectorXd w = detail::checked_weights(weights);
  const Eigen::RowVectorXd target_mean = w.transpose() * targets;

  // Drop columns that are constant under the weights.
  std::vector<Eigen::Index> kept;
  Eigen::RowVectorXd feature_mean = w.transpose() * features;
  std::vector<double> scale;
  for (Eigen::Index j = 0; j < features.cols(); ++j) {
    const double var = (w.array() * (features.col(j).array() - feature_mean(j)).square()).sum();
    const double magnitude = std::max(1.0, std::abs(feature_mean(j)));
    if (var > 1e-24 * magnitude * magnitude) {
      kept.push_back(j);
      scale.push_back(std::sqrt(var));
    }
  }
  const auto p = static_cast<Eigen::Index>(kept.size());
  if (m < 10 * (p + 1)) {
    throw UsageError("second-level regression needs at least 10 members per basis function (" + std::to_string(m) +
                     " members, " + std::to_string(p + 1) + " functions)");
  }

  SecondLevelFit fit;
  fit.dimension = static_cast<std::size_t>(d);
  fit.fitted.assign(static_cast<std::size_t>(m * d), 0.0);
  fit.coefficients.assign(target_mean.data(), target_mean.data() + d);

  Eigen::MatrixXd fitted = target_mean.replicate(m, 1);
  if (p > 0) {
    Eigen::MatrixXd s(m, p);
    for (Eigen::Index j = 0; j < p; ++j) {
      s.col(j) = (features.col(kept[static_cast<std::size_t>(j)]).array() - feature_mean(kept[static_cast<std::size_t>(j)])) /
                 scale[static_cast<std::size_t>(j)];
    }
    const Eigen::VectorXd sqrt_w = w.cwiseSqrt();
    const Eigen::MatrixXd sw = s.array().colwise() * sqrt_w.array();
    Eigen::MatrixXd gram = Eigen::MatrixXd(sw.transpose() * sw);
    gram.diagonal().array() += ridge;
    const Eigen::MatrixXd centered = targets.rowwise() - target_mean;
    const Eigen::MatrixXd rhs = sw.transpose() * (centered.array().colwise() * sqrt_w.array()).matrix();
    Eigen::LDLT<Eigen::MatrixXd> solver(gram);
    if (solver.info() != Eigen::Success) {
      throw NumericalError("second-level regression: normal equations could not be factorized");
    }
    const Eigen::MatrixXd beta = solver.solve(rhs);
    if (!beta.allFinite()) {
      throw NumericalError("second-level regression: singular normal equations");
    }
    fitted += s * beta;
    fit.coefficients.insert(fit.coefficients.end(), beta.data(), beta.data() + beta.size());
  }
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index c = 0; c < d; ++c) {
      fit.fitted[static_cast<std::size_t>(i * d + c)] = fitted(i, c);
    }
  }
  return fit;
}

/// Weighted mean of the targets within each cell.
[[nodiscard]] inline SecondLevelFit cell_projection(const std::vector<std::size_t>& cell, std::size_t cell_count,
                                                    const Eigen::MatrixXd& targets, std::span<const double> weights) {
  const Eigen::Index m = targets.rows();
  const Eigen::Index d = targets.cols();
  if (static_cast<Eigen::Index>(cell.size()) != m || static_cast<Eigen::Index>(weights.size()) != m) {
    throw ShapeError("cell_projection: row count mismatch");
  }
  if (static_cast<std::size_t>(m) < 10 * cell_count) {
    throw UsageError("second-level regression needs at least 10 members per history cell (" + std::to_string(m) +
                     " members, " + std::to_string(cell_count) + " cells)");
  }
  const Eigen::VectorXd w = detail::checked_weights(weights);
  Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(cell_count), d);
  Eigen::MatrixXd plain = sums;
  Eigen::VectorXd mass = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(cell_count));
  Eigen::VectorXd count = mass;
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto c = static_cast<Eigen::Index>(cell[static_cast<std::size_t>(i)]);
    sums.row(c) += w(i) * targets.row(i);
    plain.row(c) += targets.row(i);
    mass(c) += w(i);
    count(c) += 1.0;
  }
  SecondLevelFit fit;
  fit.dimension = static_cast<std::size_t>(d);
  Eigen::MatrixXd means(static_cast<Eigen::Index>(cell_count), d);
  for (Eigen::Index c = 0; c < static_cast<Eigen::Index>(cell_count); ++c) {
    means.row(c) = mass(c) > 0.0 ? Eigen::RowVectorXd(sums.row(c) / mass(c)) : Eigen::RowVectorXd(plain.row(c) / count(c));
  }
  fit.coefficients.assign(means.data(), means.data() + means.size());
  fit.fitted.resize(static_cast<std::size_t>(m * d));
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index c = 0; c < d; ++c) {
      fit.fitted[static_cast<std::size_t>(i * d + c)] = means(static_cast<Eigen::Index>(cell[static_cast<std::size_t>(i)]), c);
    }
  }
  return fit;
}

/// Targets (member x coordinate) at step k from per-member drift samples.
[[nodiscard]] inline Eigen::MatrixXd targets_at(std::span<const AdaptedSamples> drifts, std::size_t k) {
  const std::size_t d = drifts.front().dimension();
  Eigen::MatrixXd y(static_cast<Eigen::Index>(drifts.size()), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < drifts.size(); ++i) {
    for (std::size_t c = 0; c < d; ++c) {
      y(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = drifts[i](k, c);
    }
  }
  return y;
}

/// Fit of E_nu[u-hat_k | Z_0..Z_k] at the feature builder's current step.
[[nodiscard]] inline SecondLevelFit fit_current_step(const HistoryFeatures& features,
                                                     std::span<const AdaptedSamples> drifts,
                                                     std::span<const double> weights) {
  if (drifts.size() != features.members()) {
    throw ShapeError("second-level regression: ensemble size mismatch");
  }
  const Eigen::MatrixXd y = targets_at(drifts, features.step());
  SecondLevelFit fit;
  if (features.basis().kind == BasisSpec::Kind::kCells) {
    auto [ids, count] = features.cells();
    fit = cell_projection(ids, count, y, weights);
  } else {
    fit = weighted_projection(features.polynomial(), y, weights, features.basis().ridge);
  }
  fit.step = features.step();
  fit.features = features.describe();
  return fit;
}

namespace detail {

inline SecondLevelFit constant_fit(const Eigen::MatrixXd& targets, std::span<const double> weights) {
  const Eigen::Index m = targets.rows();
  const Eigen::Index d = targets.cols();
  double total = 0.0;
  for (double w : weights) {
    total += w;
  }
  Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(d);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double w = total > 0.0 ? weights[static_cast<std::size_t>(i)] / total : 1.0 / static_cast<double>(m);
    mean += w * targets.row(i);
  }
  SecondLevelFit fit;
  fit.dimension = static_cast<std::size_t>(d);
  fit.coefficients.assign(mean.data(), mean.data() + d);
  fit.fitted.resize(static_cast<std::size_t>(m * d));
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index c = 0; c < d; ++c) {
      fit.fitted[static_cast<std::size_t>(i * d + c)] = mean(c);
    }
  }
  return fit;
}

}  // namespace detail

/// Fit at the current step, separately within each group of members.
///
/// The group label must itself be a function of the observed history (for
/// example a stopping indicator built from earlier fits). Groups too small
/// for the basis get their weighted mean.
[[nodiscard]] inline SecondLevelFit fit_current_step(const HistoryFeatures& features,
                                                     std::span<const AdaptedSamples> drifts,
                                                     std::span<const double> weights,
                                                     std::span<const std::uint8_t> group) {
  if (group.size() != features.members()) {
    throw ShapeError("second-level regression: group labels do not cover the ensemble");
  }
  if (std::all_of(group.begin(), group.end(), [&](std::uint8_t g) { return g == group.front(); })) {
    return fit_current_step(features, drifts, weights);
  }
  const Eigen::MatrixXd y = targets_at(drifts, features.step());
  const bool cells = features.basis().kind == BasisSpec::Kind::kCells;
  const Eigen::MatrixXd x = cells ? Eigen::MatrixXd() : features.polynomial();
  std::vector<std::size_t> cell_ids;
  if (cells) {
    cell_ids = features.cells().first;
  }
  const auto d = static_cast<std::size_t>(y.cols());
  SecondLevelFit fit;
  fit.dimension = d;
  fit.step = features.step();
  fit.features = features.describe() + " | grouped";
  fit.fitted.assign(features.members() * d, 0.0);
  for (std::uint8_t label : {std::uint8_t{0}, std::uint8_t{1}}) {
    std::vector<Eigen::Index> rows;
    for (std::size_t i = 0; i < group.size(); ++i) {
      if (group[i] == label) {
        rows.push_back(static_cast<Eigen::Index>(i));
      }
    }
    if (rows.empty()) {
      continue;
    }
    const auto n = static_cast<Eigen::Index>(rows.size());
    Eigen::MatrixXd sub_y(n, y.cols());
    std::vector<double> sub_w(rows.size());
    double mass = 0.0;
    for (Eigen::Index r = 0; r < n; ++r) {
      sub_y.row(r) = y.row(rows[static_cast<std::size_t>(r)]);
      sub_w[static_cast<std::size_t>(r)] = weights[static_cast<std::size_t>(rows[static_cast<std::size_t>(r)])];
      mass += sub_w[static_cast<std::size_t>(r)];
    }
    SecondLevelFit part;
    if (mass > 0.0 && cells) {
      std::map<std::size_t, std::size_t> renumber;
      std::vector<std::size_t> ids(rows.size());
      for (std::size_t r = 0; r < rows.size(); ++r) {
        ids[r] = renumber.try_emplace(cell_ids[static_cast<std::size_t>(rows[r])], renumber.size()).first->second;
      }
      part = rows.size() >= 10 * renumber.size() ? cell_projection(ids, renumber.size(), sub_y, sub_w)
                                                 : detail::constant_fit(sub_y, sub_w);
    } else if (mass > 0.0 && n >= 10 * (x.cols() + 1)) {
      Eigen::MatrixXd sub_x(n, x.cols());
      for (Eigen::Index r = 0; r < n; ++r) {
        sub_x.row(r) = x.row(rows[static_cast<std::size_t>(r)]);
      }
      part = weighted_projection(sub_x, sub_y, sub_w, features.basis().ridge);
    } else {
      part = detail::constant_fit(sub_y, sub_w);
    }
    for (std::size_t r = 0; r < rows.size(); ++r) {
      for (std::size_t c = 0; c < d; ++c) {
        fit.fitted[static_cast<std::size_t>(rows[r]) * d + c] = part.value(r, c);
      }
    }
    fit.coefficients.insert(fit.coefficients.end(), part.coefficients.begin(), part.coefficients.end());
  }
  return fit;
}

/// One-shot second-level fit at step k (rebuilds the feature state from t_0).
[[nodiscard]] inline SecondLevelFit second_level_conditional(std::span<const Path> innovations,
                                                             std::span<const AdaptedSamples> drifts,
                                                             std::span<const double> weights, std::size_t k,
                                                             const BasisSpec& basis = {}) {
  if (innovations.size() != drifts.size() || innovations.empty()) {
    throw ShapeError("second_level_conditional: ensemble size mismatch");
  }
  if (k >= innovations.front().grid().steps()) {
    throw UsageError("second_level_conditional: step index out of range");
  }
  HistoryFeatures features(innovations, basis);
  while (features.step() < k) {
    features.advance();
  }
  return fit_current_step(features, drifts, weights);
}

}  // namespace innolab
