#pragma once

#include <stdexcept>
#include <string>

namespace thermolux {

/// Invalid argument or violated precondition. The CLI maps this to exit code 2.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// An input atom lies above the channel's x_max.
class ConstraintError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// A two-point law was requested where it has no second atom (x_m = 0).
class DegenerateDistributionError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// The output marginal vanishes on a count the probed level can emit.
class UnsupportedOutputError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Threshold search bracket does not straddle the KKT crossover.
class BracketError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// A numerical procedure failed to reach its tolerance. Exit code 70.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, double achieved)
      : std::runtime_error(what), achieved_(achieved) {}

  double achieved_tolerance() const noexcept { return achieved_; }

 private:
  double achieved_;
};

/// Histogram count would overflow its counter type.
class CapacityError : public std::overflow_error {
 public:
  using std::overflow_error::overflow_error;
};

}  // namespace thermolux
