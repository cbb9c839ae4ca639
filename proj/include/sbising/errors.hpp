#pragma once

#include <stdexcept>
#include <string>

namespace sbising {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid model parameters detected at construction time.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A call that violates an operation's preconditions (sizes, orderings, guards).
class UsageError : public Error {
 public:
  using Error::Error;
};

/// Quadrature or linear algebra did not reach the requested accuracy.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent experiment configuration. Names the offending field.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& what)
      : Error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace sbising
