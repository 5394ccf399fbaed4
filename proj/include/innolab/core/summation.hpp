#pragma once

#include <cmath>
#include <span>

namespace innolab {

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  constexpr CompensatedSum& operator+=(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      compensation_ += (sum_ - t) + x;
    } else {
      compensation_ += (x - t) + sum_;
    }
    sum_ = t;
    return *this;
  }

  [[nodiscard]] constexpr double value() const noexcept { return sum_ + compensation_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

/// Index-ordered compensated sum. The result does not depend on how the
/// values were produced, only on their order in the span.
[[nodiscard]] inline double fixed_order_sum(std::span<const double> values) noexcept {
  CompensatedSum acc;
  for (double v : values) {
    acc += v;
  }
  return acc.value();
}

}  // namespace innolab
