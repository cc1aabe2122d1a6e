#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "nln/forms.hpp"
#include "nln/mesh.hpp"
#include "nln/quadrature.hpp"

namespace nln {

struct DescentConfig {
  double grad_tol = 1e-8;        // dual-norm stopping threshold
  double armijo_c = 1e-4;
  double backtrack_ratio = 0.5;
  int max_iter = 50000;
  int max_backtracks = 60;
  double initial_step = 1.0;
};

struct SolveStats {
  int iterations = 0;
  bool converged = false;
  double grad_norm = 0.0;
  std::vector<double> objective_trace;  // strictly nonincreasing
};

using ObjectiveFn = std::function<double(const DiscreteFunction&)>;
using GradientFn = std::function<DualVector(const DiscreteFunction&)>;
// Objective change value(u + alpha dir) - value(u), evaluated in a way that
// stays accurate when the change is far below the ulp of the objective.
using DeltaFn = std::function<double(
    const DiscreteFunction&, const std::vector<double>&, double)>;

// Polak-Ribiere conjugate descent with monotone Armijo backtracking.
// Directions live under diagonal mesh scaling (gradient components divided by
// the nodal weights), which keeps steps mesh-size independent. Throws
// solver_error when backtracking cannot produce any decrease away from the
// gradient-tolerance floor; plain non-convergence within max_iter returns
// stats with converged = false.
std::pair<DiscreteFunction, SolveStats> descend(const ObjectiveFn& value,
                                                const GradientFn& gradient,
                                                const DiscreteFunction& u0,
                                                const DescentConfig& cfg);

// Same iteration, but Armijo acceptance compares a directly evaluated
// objective difference against c * alpha * slope instead of subtracting two
// full objective values, so decreases below the objective's ulp can still be
// certified. The running objective is tracked incrementally from the accepted
// deltas; value() is only called once for the anchor.
std::pair<DiscreteFunction, SolveStats> descend(const ObjectiveFn& value,
                                                const GradientFn& gradient,
                                                const DeltaFn& delta,
                                                const DiscreteFunction& u0,
                                                const DescentConfig& cfg);

// One implicit (proximal) Euler step of the nonlocal heat flow: minimizes
//   (1/(2 tau)) ||v - u_prev||^2_{L^2(Omega)} + (1/p) [v]^p
// over all nodal values (exterior DOFs free), started from u_prev, so the
// energy [v]^p never increases across a step regardless of how early the
// iteration stops.
std::pair<DiscreteFunction, SolveStats> prox_step(const DiscreteFunction& u_prev,
                                                  double tau,
                                                  const QuadTable& table,
                                                  const DescentConfig& cfg);

// Root of a monotone nondecreasing scalar function on a sign-separating
// bracket: bisection-safeguarded secant, terminating when the bracket width
// drops below tol (or an exact zero is hit). Throws domain_error if
// phi(lo) > 0 or phi(hi) < 0.
double root_find_monotone(const std::function<double(double)>& phi, double lo,
                          double hi, double tol);

}  // namespace nln
