#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "innolab/core/errors.hpp"

namespace innolab {

/// Uniform grid t_k = k * horizon / steps on [0, horizon].
class TimeGrid {
 public:
  TimeGrid(std::size_t steps, double horizon = 1.0) : steps_(steps), horizon_(horizon) {
    if (steps == 0) {
      throw ConfigurationError("time grid needs at least one step");
    }
    if (!(horizon > 0.0) || !std::isfinite(horizon)) {
      throw ConfigurationError("time grid horizon must be positive and finite");
    }
  }

  [[nodiscard]] std::size_t steps() const noexcept { return steps_; }
  [[nodiscard]] double horizon() const noexcept { return horizon_; }
  [[nodiscard]] double step() const noexcept { return horizon_ / static_cast<double>(steps_); }

  /// Grid point t_k; exact at k = steps.
  [[nodiscard]] double time(std::size_t k) const noexcept {
    return k == steps_ ? horizon_ : horizon_ * static_cast<double>(k) / static_cast<double>(steps_);
  }

  /// Index k with t_k == t, if t lies on the grid (to 1e-12 relative).
  [[nodiscard]] bool contains(double t, std::size_t* index = nullptr) const noexcept {
    const double scaled = t / horizon_ * static_cast<double>(steps_);
    const double rounded = std::round(scaled);
    if (rounded < 0.0 || rounded > static_cast<double>(steps_) ||
        std::abs(scaled - rounded) > 1e-9) {
      return false;
    }
    if (index != nullptr) {
      *index = static_cast<std::size_t>(rounded);
    }
    return true;
  }

  friend bool operator==(const TimeGrid&, const TimeGrid&) = default;

 private:
  std::size_t steps_;
  double horizon_;
};

/// Values of a d-dimensional process at the N+1 grid points (row-major).
class Path {
 public:
  Path(TimeGrid grid, std::size_t dimension)
      : grid_(grid), dimension_(dimension), values_((grid.steps() + 1) * dimension, 0.0) {
    if (dimension == 0) {
      throw ConfigurationError("path dimension must be positive");
    }
  }

  [[nodiscard]] const TimeGrid& grid() const noexcept { return grid_; }
  [[nodiscard]] std::size_t dimension() const noexcept { return dimension_; }
  [[nodiscard]] std::size_t points() const noexcept { return grid_.steps() + 1; }

  [[nodiscard]] double& operator()(std::size_t k, std::size_t c = 0) noexcept {
    return values_[k * dimension_ + c];
  }
  [[nodiscard]] double operator()(std::size_t k, std::size_t c = 0) const noexcept {
    return values_[k * dimension_ + c];
  }

  [[nodiscard]] std::span<double> row(std::size_t k) noexcept {
    return {values_.data() + k * dimension_, dimension_};
  }
  [[nodiscard]] std::span<const double> row(std::size_t k) const noexcept {
    return {values_.data() + k * dimension_, dimension_};
  }

  /// X(t_{k+1}) - X(t_k) in coordinate c.
  [[nodiscard]] double increment(std::size_t k, std::size_t c = 0) const noexcept {
    return (*this)(k + 1, c) - (*this)(k, c);
  }

  [[nodiscard]] std::span<const double> values() const noexcept { return values_; }

  friend bool operator==(const Path&, const Path&) = default;

 private:
  TimeGrid grid_;
  std::size_t dimension_;
  std::vector<double> values_;
};

/// Left-endpoint samples of an adapted process: row k is the value on [t_k, t_{k+1}).
class AdaptedSamples {
 public:
  AdaptedSamples(TimeGrid grid, std::size_t dimension)
      : grid_(grid), dimension_(dimension), values_(grid.steps() * dimension, 0.0) {
    if (dimension == 0) {
      throw ConfigurationError("sample dimension must be positive");
    }
  }

  [[nodiscard]] const TimeGrid& grid() const noexcept { return grid_; }
  [[nodiscard]] std::size_t dimension() const noexcept { return dimension_; }
  [[nodiscard]] std::size_t rows() const noexcept { return grid_.steps(); }

  [[nodiscard]] double& operator()(std::size_t k, std::size_t c = 0) noexcept {
    return values_[k * dimension_ + c];
  }
  [[nodiscard]] double operator()(std::size_t k, std::size_t c = 0) const noexcept {
    return values_[k * dimension_ + c];
  }

  [[nodiscard]] std::span<double> row(std::size_t k) noexcept {
    return {values_.data() + k * dimension_, dimension_};
  }
  [[nodiscard]] std::span<const double> row(std::size_t k) const noexcept {
    return {values_.data() + k * dimension_, dimension_};
  }

  [[nodiscard]] std::span<const double> values() const noexcept { return values_; }

  friend bool operator==(const AdaptedSamples&, const AdaptedSamples&) = default;

 private:
  TimeGrid grid_;
  std::size_t dimension_;
  std::vector<double> values_;
};

template <class A, class B>
void require_same_shape(const A& a, const B& b, const char* what) {
  if (!(a.grid() == b.grid()) || a.dimension() != b.dimension()) {
    throw ShapeError(std::string(what) + ": grid or dimension mismatch");
  }
}

}  // namespace innolab
