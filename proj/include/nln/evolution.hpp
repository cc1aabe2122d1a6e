#pragma once

#include <vector>

#include "nln/forms.hpp"
#include "nln/mesh.hpp"
#include "nln/quadrature.hpp"
#include "nln/solvers.hpp"

namespace nln {

// int_Omega u dx, exact for piecewise-linear u (trapezoid over interior
// elements). This is the conserved quantity of the flow.
double interior_mean_mass(const DiscreteFunction& u);

struct EvolutionTrace {
  std::vector<double> times;    // 0, tau, ..., n_steps * tau
  std::vector<double> mass;     // interior_mean_mass at each time
  std::vector<double> energy;   // [u]^p at each time
  std::vector<int> iterations;  // inner solver iterations per step (0 at t=0)
  std::vector<double> snapshot_times;
  std::vector<DiscreteFunction> snapshots;
  DiscreteFunction final;
};

// Implicit Euler chain for the nonlocal heat flow with the homogeneous
// Neumann-type condition built into the energy: each step minimizes
//   (1/(2 tau)) ||v - u_k||^2_{L^2(Omega)} + (1/p) [v]^p
// from the previous iterate, so the recorded energy column never increases.
// Mass is conserved up to the inner gradient tolerance: the optimality
// pairing against v == 1 is exactly the mass increment. Snapshot requests
// are rounded to the nearest step time.
EvolutionTrace heat_solve(const DiscreteFunction& u0, double tau, int n_steps,
                          const QuadTable& table, const DescentConfig& cfg,
                          const std::vector<double>& snapshot_requests = {});

}  // namespace nln
