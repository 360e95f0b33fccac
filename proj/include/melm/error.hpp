#pragma once

#include <stdexcept>
#include <string>

namespace melm {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File could not be opened or read.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file. Carries the 1-based row/line and column when known
/// (-1 when not applicable).
class ParseError : public Error {
 public:
  ParseError(const std::string& msg, long row = -1, long column = -1)
      : Error(msg), row_(row), column_(column) {}
  long row() const { return row_; }
  long column() const { return column_; }

 private:
  long row_;
  long column_;
};

/// Input violates a documented precondition or invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A matrix required to be positive definite stayed singular after jitter.
class SingularMatrixError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration value.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace melm
