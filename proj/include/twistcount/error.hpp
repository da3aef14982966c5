#pragma once

#include <stdexcept>
#include <string>

namespace twistcount {

/// Caller violated a documented precondition.
class PreconditionError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// Input is not on the object it claims to lie on.
class DomainError : public std::domain_error {
  public:
    using std::domain_error::domain_error;
};

/// Memory or size guard tripped.
class ResourceError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Singular cubic (4A^3 + 27B^2 = 0).
class SingularCurveError : public DomainError {
  public:
    using DomainError::DomainError;
};

/// Operation needs a rational root of F but the requested one is irrational.
class NotRationalTorsionError : public DomainError {
  public:
    using DomainError::DomainError;
};

/// Point is 2-torsion where a non-2-torsion point is required.
class TorsionError : public DomainError {
  public:
    using DomainError::DomainError;
};

/// A computation ran out of its sample/work budget. Carries whatever partial
/// result the thrower chose to attach as a string.
class BudgetError : public std::runtime_error {
  public:
    BudgetError(const std::string& what, std::string partial)
        : std::runtime_error(what), partial_(std::move(partial)) {}
    const std::string& partial() const noexcept { return partial_; }

  private:
    std::string partial_;
};

}  // namespace twistcount
