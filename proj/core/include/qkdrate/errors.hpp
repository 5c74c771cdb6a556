#pragma once

#include <stdexcept>
#include <string>

namespace qkdrate {

/// Shapes or lengths that cannot be reconciled.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Argument outside the mathematical domain of an operation (e.g. log of a
/// non-positive eigenvalue).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A numerical kernel failed to converge or produced non-finite values.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Constraints admit no (positive semidefinite) solution.
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Caller broke a documented precondition (e.g. derivative at a non-interior point).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace qkdrate
