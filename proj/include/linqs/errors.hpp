#pragma once

#include <stdexcept>
#include <string>

namespace linqs {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes disagree (e.g. a 2N-vector paired with a 2M×2M matrix).
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Model data failed validation; the message carries the failing checks.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A time integration produced non-finite values or drifted out of bounds.
class IntegrationError : public Error {
 public:
  using Error::Error;
};

/// A state or covariance violates a physical constraint (det V <= 0, etc).
class PhysicsError : public Error {
 public:
  using Error::Error;
};

/// The Fock truncation is too small for the state being represented.
class CutoffError : public Error {
 public:
  using Error::Error;
};

/// Malformed or schema-violating input file.
class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace linqs
