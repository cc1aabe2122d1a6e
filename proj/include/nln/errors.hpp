#pragma once

#include <stdexcept>
#include <string>

namespace nln {

// Bad user-supplied configuration (CLI exit code 2).
struct config_error : std::runtime_error {
  explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Mathematical precondition violated (kernel on the diagonal, empty bracket,
// zero normalization, ...).
struct domain_error : std::runtime_error {
  explicit domain_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Iteration failed to certify (CLI exit code 1). Carries the last iterate
// diagnostics so callers can report them.
struct solver_error : std::runtime_error {
  solver_error(const std::string& msg, int iters, double residual)
      : std::runtime_error(msg), iterations(iters), last_residual(residual) {}
  int iterations = 0;
  double last_residual = 0.0;
};

}  // namespace nln
