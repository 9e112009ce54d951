#pragma once

#include <stdexcept>
#include <string>

namespace deltahjb {

/// Bad argument or precondition violation supplied by the caller.
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A point or value fell outside the domain an operation is defined on.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Iteration failed to converge or produced a non-finite value.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A state function returned a non-finite value at a quadrature node.
class ProjectionError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// The closed-form benchmark cannot be evaluated (e.g. Riccati blow-up).
class OracleUnavailable : public std::runtime_error {
public:
    OracleUnavailable(const std::string& what, double blowup_time)
        : std::runtime_error(what), blowup_time_(blowup_time) {}
    double blowup_time() const noexcept { return blowup_time_; }

private:
    double blowup_time_;
};

}  // namespace deltahjb
