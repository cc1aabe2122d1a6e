#pragma once

#include <vector>

#include "nln/forms.hpp"
#include "nln/mesh.hpp"
#include "nln/quadrature.hpp"
#include "nln/solvers.hpp"

namespace nln {

struct EigenPair {
  double lambda = 0.0;
  DiscreteFunction u;       // int_Omega |u|^p = 1; nontrivial pairs also have
                            // int_Omega J_p(u) = 0
  double residual = 0.0;    // dual norm of form_gradient - lambda mass_gradient
  bool certified = false;
  bool sign_change = false;
  double linf_interior = 0.0;
  double linf_exterior = 0.0;
};

// phi(u) / int_Omega |u|^p. Throws domain_error for vanishing p-mass.
double rayleigh(const DiscreteFunction& u, const QuadTable& table);

// Dual norm of the eigen-residual vector form_gradient(u) - lambda mass_gradient(u).
double eigen_residual(const DiscreteFunction& u, double lambda, const QuadTable& table);

// The trivial pair: lambda = 0 with the constant normalized to unit p-mass.
// Exact up to fp (J_p(0) = 0 pointwise), so the residual is ~0.
EigenPair first_eigenpair(const QuadTable& table);

// Projected descent on the Rayleigh quotient over the constraint set
// { int |u|^p = 1, int J_p(u) = 0 }: steps along the scaled negative
// residual, then reprojects (constant shift to restore the J_p-mean, then
// rescale; the shift maximizes the denominator, so projection never increases
// the quotient). certify_tol marks the pair certified; the loop itself aims
// for cfg.grad_tol.
EigenPair next_eigenpair(const QuadTable& table, const DiscreteFunction& seed,
                         const DescentConfig& cfg, double certify_tol = 1e-6);

// Interior nodal values take both signs beyond +-1e-8.
bool sign_change_check(const EigenPair& pair);

// Fills linf_interior (sup of |u| over interior nodes) and linf_exterior
// (sup over exterior nodes of the pointwise Neumann extension of the interior
// trace) and returns that extension. The extension is a kernel-weighted
// generalized average, so linf_exterior <= linf_interior structurally.
DiscreteFunction linf_equality_check(EigenPair& pair, const Params& params);

// Dense oracle for p = 2: assembles the quadratic form from the table,
// condenses the (free) exterior DOFs by a Schur complement, and solves the
// generalized symmetric eigenproblem (1/2) S v = lambda M v. Eigenvalues
// ascending; vectors lifted back to all nodes and normalized to unit mass.
struct DenseEigenSolution {
  std::vector<double> lambdas;
  std::vector<std::vector<double>> vectors;  // full nodal vectors
};
DenseEigenSolution dense_p2_eigen(const QuadTable& table, int count);

}  // namespace nln
