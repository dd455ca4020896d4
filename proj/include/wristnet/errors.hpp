#pragma once

#include <stdexcept>
#include <string>

namespace wristnet {

// Base for every error the library raises. The CLI maps `exit_code()` onto
// process exit status: 1 for runtime/integrity failures, 2 for bad input.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
  virtual int exit_code() const { return 1; }
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

// Backward pass called without a matching forward cache.
class StateError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

// A participant appeared in more than one split of a cross-validation run.
class IntegrityError : public Error {
 public:
  using Error::Error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
  int exit_code() const override { return 2; }
};

class InsufficientDataError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class UnsupportedRateError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class DegenerateLabelsError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// File format problems (bad magic, truncated records, version mismatch).
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace wristnet
