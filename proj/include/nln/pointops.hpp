#pragma once

#include <functional>

#include "nln/mesh.hpp"
#include "nln/params.hpp"
#include "nln/quadrature.hpp"

namespace nln {

struct PointEval {
  double value = 0.0;
  double quad_error = 0.0;  // accumulated adaptive error estimate
  double tail_bound = 0.0;  // |J_p| bound times neglected kernel mass
};

// Principal-value evaluation of the fractional p-Laplacian at x in Omega,
// truncated at the collar:
//   PV int_{a-R}^{b+R} J_p(u(x)-u(y)) |x-y|^{-(1+ps)} dy.
// Near x the symmetric pairing J_p(u(x)-u(x+t)) + J_p(u(x)-u(x-t)) tames the
// singularity. Below a sampling scale (1e-3 of the window) the pairing of
// direct samples is pure cancellation noise, so that piece is integrated
// from a fitted local quadratic model of u; the rest of the window and the
// one-sided far field use adaptive quadrature. pre: u is C^2 near x. Throws
// domain_error at stationary points where the pairing decays like t^{2(p-1)}
// with 2(p-1) <= ps, i.e. where the principal value does not exist.
PointEval eval_plap(const std::function<double(double)>& u, double x,
                    const Mesh& mesh, const Params& params, double window = 0.0);

// Same operator for a piecewise-linear u at a point strictly inside an
// interior element: inside the window up to the nearest node the pairing
// cancels exactly, beyond it the integral is split at every node.
PointEval eval_plap(const DiscreteFunction& u, double x, const Params& params);

// Nonlocal normal derivative N u(x) = int_Omega J_p(u(x)-u(y)) k(x,y) dy for
// x strictly outside the closure of Omega (and within the collar).
PointEval eval_neumann(const std::function<double(double)>& u, double x,
                       const Mesh& mesh, const Params& params);
PointEval eval_neumann(const DiscreteFunction& u, double x, const Params& params);

// Replaces every exterior nodal value by the solution t of
//   int_Omega J_p(t - u(y)) k(x_i, y) dy = 0,
// the discrete Neumann condition at that node. The root is bracketed by
// [min_Omega u, max_Omega u], so extended values never leave that interval.
DiscreteFunction extend_neumann(const DiscreteFunction& u, const Params& params);

struct IdentityReport {
  double pairing = 0.0;        // discrete weak-form pairing (ibp check only)
  double interior_term = 0.0;  // int_Omega ... dx
  double exterior_term = 0.0;  // int_collar ... dx
  double residual = 0.0;
};

// Nonlocal divergence theorem for the truncated operator pair:
//   int_Omega (-Lap)^s_p u dx + int_collar N u dx = 0
// holds exactly at the truncated level, so the residual measures quadrature
// error only. Outer integrals use composite Gauss of order quad_order with
// geometric grading toward the two boundary points; inner tolerances scale
// like 10^{-quad_order}, so the residual shrinks as quad_order grows.
IdentityReport check_divergence_theorem(const std::function<double(double)>& u,
                                        const Mesh& mesh, const Params& params);

// Nonlocal integration by parts for piecewise-linear u, v:
//   <form_gradient(u), v> = int_Omega v (-Lap)^s_p u + int_collar v N u.
// Left side via the assembled table, right side via adaptive pointwise
// quadrature; the residual compares two independent quadratures of the same
// exact identity.
IdentityReport check_integration_by_parts(const DiscreteFunction& u,
                                          const DiscreteFunction& v,
                                          const QuadTable& table,
                                          const Params& params);

}  // namespace nln
