#include "nln/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <set>

#include "nln/errors.hpp"

namespace nln {

double interior_mean_mass(const DiscreteFunction& u) {
  const Mesh& mesh = *u.mesh;
  double total = 0.0;
  for (int e = 0; e < mesh.n_elements(); ++e) {
    const Mesh::Element& el = mesh.elements[static_cast<std::size_t>(e)];
    if (el.region != Region::Interior) continue;
    total += 0.5 * mesh.element_length(e) *
             (u.values[static_cast<std::size_t>(el.n0)] +
              u.values[static_cast<std::size_t>(el.n1)]);
  }
  return total;
}

EvolutionTrace heat_solve(const DiscreteFunction& u0, double tau, int n_steps,
                          const QuadTable& table, const DescentConfig& cfg,
                          const std::vector<double>& snapshot_requests) {
  if (!(tau > 0.0)) throw config_error("heat_solve: tau must be positive");
  if (n_steps < 0) throw config_error("heat_solve: negative step count");

  std::set<int> snap_steps;
  for (double t : snapshot_requests) {
    const int k = static_cast<int>(std::llround(t / tau));
    snap_steps.insert(std::clamp(k, 0, n_steps));
  }

  EvolutionTrace trace;
  DiscreteFunction u = u0;
  FormValue fv = gagliardo(u, table);
  trace.times.push_back(0.0);
  trace.mass.push_back(interior_mean_mass(u));
  trace.energy.push_back(fv.seminorm_p);
  trace.iterations.push_back(0);
  if (snap_steps.count(0)) {
    trace.snapshot_times.push_back(0.0);
    trace.snapshots.push_back(u);
  }

  for (int k = 1; k <= n_steps; ++k) {
    auto [next, stats] = prox_step(u, tau, table, cfg);
    u = std::move(next);
    fv = gagliardo(u, table);
    trace.times.push_back(k * tau);
    trace.mass.push_back(interior_mean_mass(u));
    trace.energy.push_back(fv.seminorm_p);
    trace.iterations.push_back(stats.iterations);
    if (snap_steps.count(k)) {
      trace.snapshot_times.push_back(k * tau);
      trace.snapshots.push_back(u);
    }
  }
  trace.final = u;
  return trace;
}

}  // namespace nln
