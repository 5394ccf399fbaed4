#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace innolab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid grid, model parameters or experiment configuration.
class ConfigurationError : public Error {
 public:
  using Error::Error;
};

/// Operands live on different grids or have different dimensions.
class ShapeError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

/// A weighted ensemble collapsed (all weights zero or non-finite).
class DegeneracyError : public Error {
 public:
  explicit DegeneracyError(const std::string& what, std::optional<std::size_t> step = std::nullopt)
      : Error(step ? what + " (step " + std::to_string(*step) + ")" : what), step_(step) {}

  [[nodiscard]] std::optional<std::size_t> step() const noexcept { return step_; }

 private:
  std::optional<std::size_t> step_;
};

/// The Riccati recursion went negative: the grid is too coarse for the parameters.
class StabilityError : public Error {
 public:
  using Error::Error;
};

class UnsupportedModelError : public Error {
 public:
  using Error::Error;
};

/// p is not absolutely continuous with respect to q.
class AbsoluteContinuityError : public Error {
 public:
  using Error::Error;
};

class UsageError : public Error {
 public:
  using Error::Error;
};

/// Runs fn, prefixing any library error with the name of the failing stage
/// while keeping its type.
template <class F>
decltype(auto) in_stage(const std::string& stage, F&& fn) {
  const auto tag = [&](const std::exception& e) { return "stage '" + stage + "': " + e.what(); };
  try {
    return fn();
  } catch (const ConfigurationError& e) {
    throw ConfigurationError(tag(e));
  } catch (const ShapeError& e) {
    throw ShapeError(tag(e));
  } catch (const NumericalError& e) {
    throw NumericalError(tag(e));
  } catch (const DegeneracyError& e) {
    throw DegeneracyError(tag(e));
  } catch (const StabilityError& e) {
    throw StabilityError(tag(e));
  } catch (const UnsupportedModelError& e) {
    throw UnsupportedModelError(tag(e));
  } catch (const AbsoluteContinuityError& e) {
    throw AbsoluteContinuityError(tag(e));
  } catch (const UsageError& e) {
    throw UsageError(tag(e));
  }
}

}  // namespace innolab
