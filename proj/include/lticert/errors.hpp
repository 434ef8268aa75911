#pragma once

#include <stdexcept>
#include <string>

namespace lticert {

// Invalid caller-supplied data (shapes, signs, malformed configuration).
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class DimensionError : public InputError {
 public:
  using InputError::InputError;
};

// A matrix that must be Schur is not.
class StabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An iterative procedure ran out of its iteration budget.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A parameter violates a theorem's admissibility condition (e.g. lambda too large).
class ConstraintError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnsupportedStructureError : public InputError {
 public:
  using InputError::InputError;
};

class ParseError : public InputError {
 public:
  ParseError(const std::string& what, int line)
      : InputError(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

}  // namespace lticert
