#pragma once

#include <Eigen/Eigenvalues>

#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

#include "innolab/core/errors.hpp"

namespace innolab::oracle {

/// Finite stand-in for a N(0, dt) increment: m nodes with probabilities.
///
/// Nodes are stored for unit variance and scaled by sqrt(dt) on use.
class QuantizedNoise {
 public:
  QuantizedNoise(std::vector<double> unit_nodes, std::vector<double> probabilities)
      : nodes_(std::move(unit_nodes)), probabilities_(std::move(probabilities)) {
    if (nodes_.empty() || nodes_.size() != probabilities_.size()) {
      throw ConfigurationError("quantized noise needs matching, non-empty node and probability lists");
    }
    double total = 0.0;
    for (double p : probabilities_) {
      if (!(p > 0.0)) {
        throw ConfigurationError("quantized noise probabilities must be positive");
      }
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-12) {
      throw ConfigurationError("quantized noise probabilities must sum to 1");
    }
  }

  /// Gauss-Hermite rule with m nodes: matches N(0,1) moments up to order 2m-1.
  static QuantizedNoise gaussian(std::size_t m) {
    if (m == 0) {
      throw ConfigurationError("quantized noise needs at least one node");
    }
    if (m == 1) {
      return QuantizedNoise({0.0}, {1.0});
    }
    // Golub-Welsch on the Jacobi matrix of the probabilists' Hermite polynomials.
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
    for (std::size_t i = 1; i < m; ++i) {
      const auto a = static_cast<Eigen::Index>(i);
      jacobi(a - 1, a) = jacobi(a, a - 1) = std::sqrt(static_cast<double>(i));
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
    std::vector<double> nodes(m);
    std::vector<double> probs(m);
    for (std::size_t i = 0; i < m; ++i) {
      const auto a = static_cast<Eigen::Index>(i);
      double x = solver.eigenvalues()(a);
      nodes[i] = std::abs(x) < 1e-14 ? 0.0 : x;
      probs[i] = solver.eigenvectors()(0, a) * solver.eigenvectors()(0, a);
    }
    // Exact symmetry, so that the quantized walk has mean zero to the last bit.
    for (std::size_t i = 0; i < m / 2; ++i) {
      const double x = 0.5 * (nodes[m - 1 - i] - nodes[i]);
      const double p = 0.5 * (probs[i] + probs[m - 1 - i]);
      nodes[i] = -x;
      nodes[m - 1 - i] = x;
      probs[i] = probs[m - 1 - i] = p;
    }
    const double total = std::accumulate(probs.begin(), probs.end(), 0.0);
    for (double& p : probs) {
      p /= total;
    }
    return {std::move(nodes), std::move(probs)};
  }

  [[nodiscard]] std::size_t size() const noexcept { return nodes_.size(); }
  [[nodiscard]] const std::vector<double>& unit_nodes() const noexcept { return nodes_; }
  [[nodiscard]] const std::vector<double>& probabilities() const noexcept { return probabilities_; }

  [[nodiscard]] double node(std::size_t i, double dt) const noexcept { return nodes_[i] * std::sqrt(dt); }

  /// Index of the node equal to `value` (within a relative 1e-9 of the node
  /// spacing), or size() if the value is not a node.
  [[nodiscard]] std::size_t match(double value, double dt) const noexcept {
    const double scale = std::sqrt(dt);
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      if (std::abs(value - nodes_[i] * scale) <= 1e-9 * scale) {
        return i;
      }
    }
    return nodes_.size();
  }

 private:
  std::vector<double> nodes_;
  std::vector<double> probabilities_;
};

}  // namespace innolab::oracle
