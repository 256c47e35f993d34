#pragma once

#include <stdexcept>
#include <string>

namespace aunce {

/// Base of every error raised by the library. The CLI maps the concrete
/// subclasses onto distinct exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller broke a precondition (dimension or shape mismatch, bad index).
class ContractViolation : public Error {
 public:
  using Error::Error;
};

/// A configuration value is outside its documented range.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Input is well-formed but numerically degenerate (zero vector, empty set).
class DegenerateInput : public Error {
 public:
  using Error::Error;
};

/// Every label of a loss evaluation was skipped.
class EmptyBatch : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// A non-finite value appeared, or a numeric check failed.
class NumericFailure : public Error {
 public:
  using Error::Error;
};

}  // namespace aunce
