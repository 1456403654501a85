#pragma once

#include <stdexcept>
#include <string>

namespace errplan {

// Every error raised by the library derives from Error so callers can catch
// a single type; the subclasses exist so the CLI can map them to exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class UnknownLine : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class DimensionError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class InfeasibleBounds : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class MissingParameter : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class ModelError : public Error {
 public:
  using Error::Error;
};

class TooLarge : public Error {
 public:
  using Error::Error;
};

class Infeasible : public Error {
 public:
  using Error::Error;
};

class SolverFailure : public Error {
 public:
  using Error::Error;
};

// A search limit was reached before any feasible point was found.
class TimeLimit : public Error {
 public:
  using Error::Error;
};

// Raised by the continuous backend; `diagnostics` carries the iteration log
// and, when thrown from inside branch-and-bound, the serialized subproblem.
class NumericalFailure : public SolverFailure {
 public:
  NumericalFailure(const std::string& what, std::string diagnostics)
      : SolverFailure(what), diagnostics_(std::move(diagnostics)) {}
  const std::string& diagnostics() const noexcept { return diagnostics_; }

 private:
  std::string diagnostics_;
};

}  // namespace errplan
