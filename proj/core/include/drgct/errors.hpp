#pragma once

#include <stdexcept>
#include <string>

namespace drgct {

/// Malformed or unusable input data (short series, bad CSV, nonpositive
/// prices). Maps to CLI exit code 2.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical failure during estimation or simulation (non-finite loss,
/// diverging recursion). Maps to CLI exit code 3.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

/// A simulated path left the admissible range. Carries the step at which
/// the guard fired so harnesses can redraw and count the event.
class DivergenceError : public NumericalError {
 public:
  DivergenceError(const std::string& what, long step)
      : NumericalError(what), step_(step) {}
  long step() const { return step_; }

 private:
  long step_;
};

/// Bad CLI usage or invalid configuration. Maps to CLI exit code 1.
class UsageError : public std::runtime_error {
 public:
  explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace drgct
