#pragma once

#include <functional>

namespace nln::detail {

struct AdaptiveResult {
  double value = 0.0;
  double error = 0.0;   // accumulated embedded-rule estimate
  int evaluations = 0;
};

// Adaptive Gauss-Kronrod 15(7) on [a,b]. Splits the worst interval until the
// summed error estimate drops below max(tol_abs, tol_rel*|value|) or the
// interval budget is exhausted. Endpoint singularities are fine as long as
// they are integrable: Kronrod nodes are interior.
AdaptiveResult adaptive_gk(const std::function<double(double)>& f, double a,
                           double b, double tol_abs, double tol_rel = 0.0,
                           int max_intervals = 2000);

// Single GK15 panel, no subdivision.
AdaptiveResult gk15_panel(const std::function<double(double)>& f, double a, double b);

}  // namespace nln::detail
