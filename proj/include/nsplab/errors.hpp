#pragma once

#include <stdexcept>
#include <string>

namespace nsp {

// Precondition violations (bad parameters, non-finite input, out-of-range indices).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A time step that the scheme refuses to take. admissible_dt is the largest dt the
// check would have accepted (0 when no such bound applies, e.g. positivity failure).
class StepRejected : public std::runtime_error {
 public:
  StepRejected(const std::string& what, double admissible_dt)
      : std::runtime_error(what), admissible_dt_(admissible_dt) {}
  double admissible_dt() const { return admissible_dt_; }

 private:
  double admissible_dt_;
};

// File format problems: wrong header, wrong version, truncated data.
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace nsp
