#pragma once

#include <stdexcept>
#include <string>

namespace sdm {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shapes of two operands disagree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A precondition on a scalar or structural argument failed.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A matrix that must be inverted is singular. `step` is the recursion
/// index at which it happened, or -1 when not applicable.
class SingularMatrixError : public Error {
 public:
  SingularMatrixError(const std::string& what, int step)
      : Error(what), step_(step) {}
  int step() const { return step_; }

 private:
  int step_;
};

/// No feasible action exists for `state` at stage `time` under a terminal
/// constraint.
class InfeasibleError : public Error {
 public:
  InfeasibleError(const std::string& what, int state, int time)
      : Error(what), state_(state), time_(time) {}
  int state() const { return state_; }
  int time() const { return time_; }

 private:
  int state_;
  int time_;
};

/// Experiment configuration failed schema validation. `path` is the JSON
/// pointer-like location of the offending field, e.g. "params.T".
class ValidationError : public Error {
 public:
  ValidationError(const std::string& path, const std::string& message)
      : Error(path + ": " + message), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

}  // namespace sdm
