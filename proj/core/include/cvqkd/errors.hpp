#pragma once

#include <stdexcept>
#include <string>

namespace cvqkd {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A parameter or matrix fails its type's invariants (bad input).
class ValidationError : public Error {
public:
  using Error::Error;
};

/// A value lies outside the mathematical domain of an operation,
/// e.g. an unphysical symplectic eigenvalue or a variance below vacuum.
class DomainError : public ValidationError {
public:
  using ValidationError::ValidationError;
};

/// A matrix that should be invertible is numerically singular.
class NumericalError : public Error {
public:
  using Error::Error;
};

/// Parameter estimation from raw data is impossible (degenerate data).
class EstimationError : public Error {
public:
  using Error::Error;
};

/// The protocol has no positive key rate even at unity transmission.
class InsecureError : public Error {
public:
  using Error::Error;
};

} // namespace cvqkd
