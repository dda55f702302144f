#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace fkbridge {

/// Base class for all toolkit errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition was violated: bad argument, mismatched shapes, invalid range.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values, degenerate divisions, or lost strict positivity.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// An iteration or series failed to converge; carries the residual trail.
class ConvergenceError : public Error {
 public:
  explicit ConvergenceError(const std::string& what,
                            std::vector<double> history = {})
      : Error(what), residual_history(std::move(history)) {}

  std::vector<double> residual_history;
};

/// Structurally inconsistent inputs: kernel/field mismatch, broken tiling.
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

/// Invalid run configuration (CLI flags or config file).
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace fkbridge
