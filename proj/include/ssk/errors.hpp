#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace ssk {

/// Bad dimensions, non-positive step sizes, out-of-range parameters.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The integrator produced a non-finite state.
class NumericalOverflowError : public std::runtime_error {
 public:
  NumericalOverflowError(const std::string& what, std::vector<double> state)
      : std::runtime_error(what), state_(std::move(state)) {}

  const std::vector<double>& state() const noexcept { return state_; }

 private:
  std::vector<double> state_;
};

/// A reciprocal certificate was evaluated on or outside the safe-set boundary.
class BoundaryError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// The top-level row lost its control authority at this state.
class DegenerateConstraintError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A row with no decision-variable dependence that can never hold.
class InfeasibleConstraintError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A barrier chain failed its relative-degree checks.
class CertificateConstructionError : public std::runtime_error {
 public:
  CertificateConstructionError(const std::string& what, int level, std::vector<double> state)
      : std::runtime_error(what), level_(level), state_(std::move(state)) {}

  int level() const noexcept { return level_; }
  const std::vector<double>& state() const noexcept { return state_; }

 private:
  int level_;
  std::vector<double> state_;
};

/// Initial state is outside some C_j interior, so the product bound does not apply.
class HypothesisViolationError : public std::domain_error {
 public:
  HypothesisViolationError(const std::string& what, int level)
      : std::domain_error(what), level_(level) {}

  int level() const noexcept { return level_; }

 private:
  int level_;
};

/// A controller threw while a trajectory was being integrated.
class ControllerError : public std::runtime_error {
 public:
  ControllerError(const std::string& what, std::size_t step)
      : std::runtime_error(what), step_(step) {}

  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

/// Bad scenario configuration (unknown keys, wrong types, invalid values).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ssk
