#pragma once

#include "nln/errors.hpp"

namespace nln {

// Model and discretization parameters shared across modules.
//   p            : integrability exponent, p > 1
//   s            : differentiability order, s in (0,1)
//   r            : superlinear growth exponent for source problems, r > p
//   collar       : half-width R of the truncated exterior collar
//   quad_order   : Gauss points per direction in assembled rules
//   tol_solver   : dual-norm gradient tolerance for descent loops
//   tol_quad     : absolute tolerance for adaptive quadrature
struct Params {
  double p = 2.0;
  double s = 0.5;
  double r = 3.0;
  double collar = 1.0;
  int quad_order = 6;
  double tol_solver = 1e-8;
  double tol_quad = 1e-6;

  double ps() const { return p * s; }

  void validate() const {
    if (!(p > 1.0)) throw config_error("params: p must satisfy p > 1");
    if (!(s > 0.0 && s < 1.0)) throw config_error("params: s must lie in (0,1)");
    if (!(collar > 0.0)) throw config_error("params: collar must be positive");
    if (quad_order < 2) throw config_error("params: quad_order must be >= 2");
    if (!(tol_solver > 0.0)) throw config_error("params: tol_solver must be positive");
    if (!(tol_quad > 0.0)) throw config_error("params: tol_quad must be positive");
  }
};

}  // namespace nln
