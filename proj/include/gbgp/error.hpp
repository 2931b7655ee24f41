#pragma once

#include <stdexcept>
#include <string>

namespace gbgp {

// Bad user input: malformed files, out-of-range parameters, inconsistent
// shapes. Maps to CLI exit code 2.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Filesystem failures. Maps to CLI exit code 4.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Numerical breakdown inside the solver (non-finite objective, step-size
// underflow).
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace gbgp
