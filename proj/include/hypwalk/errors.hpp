#pragma once

#include <stdexcept>
#include <string>

namespace hypwalk {

// Configuration-class failures (bad schema, bad symbols, inadmissible
// measures). CLI exit code 2.
struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct malformed_input_error : config_error {
  using config_error::config_error;
};

// Numerical/budget-class failures. CLI exit code 3.
struct numeric_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// An element fell outside the precomputed ball budget.
struct radius_error : numeric_error {
  int required_radius;
  explicit radius_error(const std::string& what, int required)
      : numeric_error(what), required_radius(required) {}
};

// Memory or iteration budget exhausted; carries how far we got.
struct budget_error : numeric_error {
  long long reached;
  explicit budget_error(const std::string& what, long long reached_ = -1)
      : numeric_error(what), reached(reached_) {}
};

// Truncated-horofunction precision too small for the requested operation.
struct precision_error : numeric_error {
  using numeric_error::numeric_error;
};

// Boundary enumeration did not stabilize across the sphere window.
struct instability_error : numeric_error {
  int radius_a, radius_b;
  instability_error(const std::string& what, int ra, int rb)
      : numeric_error(what), radius_a(ra), radius_b(rb) {}
};

// Internal consistency violated (atlas defect, nonpositive kernel, ...).
struct integrity_error : numeric_error {
  using numeric_error::numeric_error;
};

}  // namespace hypwalk
