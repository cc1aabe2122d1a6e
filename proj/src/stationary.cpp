#include "nln/stationary.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <utility>

#include "nln/detail/gauss.hpp"
#include "nln/errors.hpp"

namespace nln {

NonlinearitySpec model_nonlinearity(double r) {
  NonlinearitySpec spec;
  spec.f = [r](double, double t) { return j_p(t, r); };
  spec.F = [r](double, double t) { return std::pow(std::fabs(t), r) / r; };
  spec.r = r;
  spec.c = 1.0;
  spec.theta = 1.0;
  spec.model = true;
  return spec;
}

SignClass classify_sign(const DiscreteFunction& u) {
  const double lo = std::min(u.min_interior(), u.min_exterior());
  const double hi = std::max(u.max_interior(), u.max_exterior());
  constexpr double tol = 1e-8;
  if (hi - lo <= tol) return SignClass::Constant;
  if (lo >= -tol) return SignClass::Positive;
  if (hi <= tol) return SignClass::Negative;
  return SignClass::Mixed;
}

namespace {

// One-sided functional E_+(u) = (1/p)(phi + int |u|^p) - int F(x, u^+) and
// its weak gradient. f(x,0) = 0 for admissible specs, so the positive-part
// chain rule needs no indicator factor.
struct PlusFunctional {
  const NonlinearitySpec* spec;
  const QuadTable* table;

  double value(const DiscreteFunction& u) const {
    const Params& prm = table->params;
    FormValue fv = gagliardo(u, *table);
    const double work = integrate_interior(
        u, prm.quad_order,
        [&](double x, double t) { return spec->F(x, std::max(t, 0.0)); });
    return (fv.phi + fv.mass_p) / prm.p - work;
  }

  DualVector grad(const DiscreteFunction& u) const {
    const Params& prm = table->params;
    DualVector g = form_gradient(u, *table);
    DualVector mg = mass_gradient(u, prm);
    DualVector fg = weighted_interior(
        u, prm.quad_order,
        [&](double x, double t) { return spec->f(x, std::max(t, 0.0)); });
    for (std::size_t i = 0; i < g.v.size(); ++i) g.v[i] += mg.v[i] - fg.v[i];
    return g;
  }
};

double nehari_tstar(const DiscreteFunction& u, const NonlinearitySpec& spec,
                    const QuadTable& table) {
  const Params& prm = table.params;
  if (!spec.model)
    throw domain_error("nehari projection requires the model nonlinearity");
  FormValue fv = gagliardo(u, table);
  const double upr = integrate_interior(u, prm.quad_order, [&](double, double t) {
    return std::pow(std::max(t, 0.0), spec.r);
  });
  if (!(upr > 1e-300))
    throw domain_error("nehari projection: positive part vanishes");
  const double normp = fv.phi + fv.mass_p;
  if (!(normp > 1e-300))
    throw domain_error("nehari projection: zero function");
  return std::pow(normp / upr, 1.0 / (spec.r - prm.p));
}

SolveReport make_report(DiscreteFunction u, double residual, double objective,
                        bool certified, SolveStats stats, double tstar) {
  SolveReport rep;
  rep.grad_residual = residual;
  rep.objective = objective;
  rep.certified = certified;
  rep.sign = classify_sign(u);
  rep.min_interior = u.min_interior();
  rep.max_interior = u.max_interior();
  rep.min_exterior = u.min_exterior();
  rep.max_exterior = u.max_exterior();
  rep.nehari_scale = tstar;
  rep.stats = std::move(stats);
  rep.u = std::move(u);
  return rep;
}

// Constrained descent on the Nehari set of the model functional: step along
// the scaled negative gradient, rescale back onto the set. The constraint is
// <E'(u), u> = 0, so the residual is tangent and the Armijo slope is the
// unconstrained one.
SolveReport mp_nehari(const NonlinearitySpec& spec, const QuadTable& table,
                      const DiscreteFunction& seed, const DescentConfig& cfg) {
  const Mesh& mesh = *table.mesh;
  const std::vector<double> w = mesh.node_weights();
  const int n = mesh.n_nodes();
  PlusFunctional fun{&spec, &table};

  double tstar = nehari_tstar(seed, spec, table);
  DiscreteFunction u = seed;
  for (double& v : u.values) v *= tstar;
  double energy = fun.value(u);

  SolveStats stats;
  stats.objective_trace.push_back(energy);
  DualVector g = fun.grad(u);
  double rn = g.dual_norm();

  std::vector<double> prev_u, prev_ghat;
  std::vector<double> ghat(static_cast<std::size_t>(n));
  double step = cfg.initial_step;

  for (; stats.iterations < cfg.max_iter && rn > cfg.grad_tol;
       ++stats.iterations) {
    for (int i = 0; i < n; ++i) ghat[i] = g.v[i] / w[i];
    if (!prev_u.empty()) {
      double num = 0.0, den = 0.0;
      for (int i = 0; i < n; ++i) {
        const double du = u.values[i] - prev_u[i];
        const double dg = ghat[i] - prev_ghat[i];
        num += du * du;
        den += du * dg;
      }
      step = den > 0.0 ? std::clamp(num / den, 1e-12, 1e10) : cfg.initial_step;
    }
    prev_u = u.values;
    prev_ghat = ghat;

    const double slope = rn * rn;
    double alpha = step;
    bool accepted = false;
    DiscreteFunction cand(mesh);
    double cand_energy = 0.0, cand_t = 1.0;
    for (int bt = 0; bt <= cfg.max_backtracks; ++bt) {
      cand.values = u.values;
      for (int i = 0; i < n; ++i) cand.values[i] -= alpha * ghat[i];
      try {
        cand_t = nehari_tstar(cand, spec, table);
      } catch (const domain_error&) {
        alpha *= cfg.backtrack_ratio;
        continue;
      }
      for (double& v : cand.values) v *= cand_t;
      cand_energy = fun.value(cand);
      if (cand_energy <= energy - cfg.armijo_c * alpha * slope) {
        accepted = true;
        break;
      }
      alpha *= cfg.backtrack_ratio;
    }
    if (!accepted) break;  // at the set's resolution floor
    u = std::move(cand);
    tstar = cand_t;
    energy = cand_energy;
    stats.objective_trace.push_back(energy);
    g = fun.grad(u);
    rn = g.dual_norm();
  }

  stats.grad_norm = rn;
  stats.converged = rn <= cfg.grad_tol;
  return make_report(std::move(u), rn, energy, false, std::move(stats), tstar);
}

// Path-deformation search for general admissible specs: the maximum-energy
// point of a path from 0 to a negative-energy endpoint descends onto the
// pass; a residual-norm minimization then certifies the critical point. The
// residual functional R(u) = ||E'(u)||_*^2 has gradient 2 H(u) W^{-1} E'(u)
// (H symmetric), approximated by one forward difference of the gradient.
SolveReport mp_path(const NonlinearitySpec& spec, const QuadTable& table,
                    const DiscreteFunction& seed, const DescentConfig& cfg) {
  const Mesh& mesh = *table.mesh;
  const std::vector<double> w = mesh.node_weights();
  const int n = mesh.n_nodes();
  PlusFunctional fun{&spec, &table};

  DiscreteFunction profile = seed;
  for (double& v : profile.values) v = std::max(v, 0.0);
  double pmax = profile.max_interior();
  if (!(pmax > 1e-14)) {
    profile = interpolate(mesh, [&](double x) {
      const double m = 0.5 * (mesh.a + mesh.b);
      const double r = 0.5 * (mesh.b - mesh.a);
      return std::max(0.0, 1.0 - std::pow((x - m) / r, 2));
    });
    pmax = 1.0;
  }
  for (double& v : profile.values) v /= pmax;

  auto scaled = [&](double t) {
    DiscreteFunction u(mesh);
    for (int i = 0; i < n; ++i) u.values[i] = t * profile.values[i];
    return u;
  };
  double t_end = 1.0;
  while (fun.value(scaled(t_end)) > -1.0) {
    t_end *= 2.0;
    if (t_end > 1e60)
      throw solver_error("mountain pass: no negative-energy endpoint", 0, 0.0);
  }

  const int m = 16;  // path segments
  std::vector<DiscreteFunction> path;
  std::vector<double> pe;
  for (int j = 0; j <= m; ++j) {
    path.push_back(scaled(t_end * j / m));
    pe.push_back(fun.value(path.back()));
  }

  SolveStats stats;
  DiscreteFunction best = path[m / 2];
  double best_rn = std::numeric_limits<double>::infinity();
  const double polish_trigger = std::max(1e-3, 1e3 * cfg.grad_tol);

  // Stage 1: lower the path's maximum until it flattens near the pass.
  const int max_sweeps = 500;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    int jmax = 1;
    for (int j = 2; j < m; ++j)
      if (pe[j] > pe[jmax]) jmax = j;
    DiscreteFunction& u = path[jmax];
    DualVector g = fun.grad(u);
    const double rn = g.dual_norm();
    if (rn < best_rn) {
      best_rn = rn;
      best = u;
    }
    stats.objective_trace.push_back(pe[jmax]);
    if (rn <= polish_trigger) break;

    const double slope = rn * rn;
    double alpha = cfg.initial_step;
    bool accepted = false;
    DiscreteFunction cand(mesh);
    for (int bt = 0; bt <= cfg.max_backtracks; ++bt) {
      cand.values = u.values;
      for (int i = 0; i < n; ++i) cand.values[i] -= alpha * g.v[i] / w[i];
      const double ce = fun.value(cand);
      if (ce <= pe[jmax] - cfg.armijo_c * alpha * slope) {
        accepted = true;
        pe[jmax] = ce;
        u = std::move(cand);
        break;
      }
      alpha *= cfg.backtrack_ratio;
    }
    ++stats.iterations;
    if (!accepted) break;  // maximizer pinned at the pass
  }

  // Stage 2: minimize the squared dual residual from the pass candidate.
  DiscreteFunction u = best;
  DualVector g = fun.grad(u);
  double rn = g.dual_norm();
  double robj = rn * rn;

  auto rgrad = [&](const DiscreteFunction& uu, const DualVector& gg,
                   std::vector<double>& out) {
    std::vector<double> gsharp(static_cast<std::size_t>(n));
    double gs_inf = 0.0, u_inf = 0.0;
    for (int i = 0; i < n; ++i) {
      gsharp[i] = gg.v[i] / w[i];
      gs_inf = std::max(gs_inf, std::fabs(gsharp[i]));
      u_inf = std::max(u_inf, std::fabs(uu.values[i]));
    }
    const double eps = 1e-6 * (1.0 + u_inf) / std::max(gs_inf, 1e-300);
    DiscreteFunction up = uu;
    for (int i = 0; i < n; ++i) up.values[i] += eps * gsharp[i];
    DualVector gp = fun.grad(up);
    for (int i = 0; i < n; ++i) out[i] = 2.0 * (gp.v[i] - gg.v[i]) / eps;
  };

  std::vector<double> dr(static_cast<std::size_t>(n));
  std::vector<double> prev_u, prev_ghat;
  std::vector<double> ghat(static_cast<std::size_t>(n));
  double step = cfg.initial_step;
  for (; stats.iterations < cfg.max_iter && rn > cfg.grad_tol;
       ++stats.iterations) {
    rgrad(u, g, dr);
    double slope = 0.0;
    for (int i = 0; i < n; ++i) {
      ghat[i] = dr[i] / w[i];
      slope += dr[i] * ghat[i];
    }
    if (!(slope > 0.0)) break;  // FD direction lost descent signal
    if (!prev_u.empty()) {
      double num = 0.0, den = 0.0;
      for (int i = 0; i < n; ++i) {
        const double du = u.values[i] - prev_u[i];
        const double dg = ghat[i] - prev_ghat[i];
        num += du * du;
        den += du * dg;
      }
      step = den > 0.0 ? std::clamp(num / den, 1e-14, 1e8) : cfg.initial_step;
    }
    prev_u = u.values;
    prev_ghat = ghat;

    double alpha = step;
    bool accepted = false;
    DiscreteFunction cand(mesh);
    DualVector cg;
    double crn = 0.0, cobj = 0.0;
    for (int bt = 0; bt <= cfg.max_backtracks; ++bt) {
      cand.values = u.values;
      for (int i = 0; i < n; ++i) cand.values[i] -= alpha * ghat[i];
      cg = fun.grad(cand);
      crn = cg.dual_norm();
      cobj = crn * crn;
      if (cobj <= robj - cfg.armijo_c * alpha * slope) {
        accepted = true;
        break;
      }
      alpha *= cfg.backtrack_ratio;
    }
    if (!accepted) break;
    u = std::move(cand);
    g = cg;
    rn = crn;
    robj = cobj;
  }

  stats.grad_norm = rn;
  stats.converged = rn <= cfg.grad_tol;
  return make_report(u, rn, fun.value(u), false, std::move(stats), 1.0);
}

NonlinearitySpec reflect(const NonlinearitySpec& spec) {
  NonlinearitySpec out = spec;
  auto f = spec.f;
  auto F = spec.F;
  out.f = [f](double x, double t) { return -f(x, -t); };
  out.F = [F](double x, double t) { return F(x, -t); };
  return out;
}

}  // namespace

SolveReport solve_poisson(const std::function<double(double)>& f,
                          const QuadTable& table, const DiscreteFunction& u0,
                          const DescentConfig& cfg) {
  const Params& prm = table.params;
  const DualVector src = source_vector(*table.mesh, prm.quad_order, f);

  ObjectiveFn value = [&](const DiscreteFunction& u) {
    FormValue fv = gagliardo(u, table);
    return (fv.phi + fv.mass_p) / prm.p - src.dot(u.values);
  };
  GradientFn gradient = [&](const DiscreteFunction& u) {
    DualVector g = form_gradient(u, table);
    DualVector mg = mass_gradient(u, prm);
    for (std::size_t i = 0; i < g.v.size(); ++i) g.v[i] += mg.v[i] - src.v[i];
    return g;
  };
  DeltaFn delta = [&](const DiscreteFunction& u, const std::vector<double>& dir,
                      double alpha) {
    double lin = 0.0;
    for (std::size_t i = 0; i < dir.size(); ++i) lin += src.v[i] * dir[i];
    return (0.5 * gagliardo_delta(u, dir, alpha, table) +
            interior_power_delta(u, dir, alpha, prm.p, prm.quad_order)) /
               prm.p -
           alpha * lin;
  };

  auto [u, stats] = descend(value, gradient, delta, u0, cfg);
  const double obj = value(u);
  const double rn = stats.grad_norm;
  const bool ok = stats.converged;
  return make_report(std::move(u), rn, obj, ok, std::move(stats), 1.0);
}

Compatibility check_compatibility(const std::function<double(double)>& f,
                                  const Mesh& mesh, const Params& params) {
  const detail::Rule1D& rule = detail::cached_legendre(params.quad_order + 2);
  double integral = 0.0, total_abs = 0.0, max_abs = 0.0;
  for (int e = 0; e < mesh.n_elements(); ++e) {
    const Mesh::Element& el = mesh.elements[static_cast<std::size_t>(e)];
    if (el.region != Region::Interior) continue;
    const double x0 = mesh.nodes[static_cast<std::size_t>(el.n0)];
    const double h = mesh.element_length(e);
    for (std::size_t k = 0; k < rule.x.size(); ++k) {
      const double fx = f(x0 + h * rule.x[k]);
      integral += h * rule.w[k] * fx;
      total_abs += h * rule.w[k] * std::fabs(fx);
      max_abs = std::max(max_abs, std::fabs(fx));
    }
  }
  if (max_abs <= 1e-13) return Compatibility::CompatibleConstants;
  if (std::fabs(integral) <= 1e-10 * std::max(1.0, total_abs))
    return Compatibility::Compatible;
  return Compatibility::Incompatible;
}

HypothesisReport check_growth_hypotheses(const NonlinearitySpec& spec,
                                         const Params& params,
                                         const std::vector<double>& positions,
                                         const std::vector<double>& values) {
  HypothesisReport rep;
  if (positions.empty() || values.empty()) return rep;
  std::vector<double> ts = values;
  std::sort(ts.begin(), ts.end());
  const double p = params.p;

  double t_small = std::numeric_limits<double>::infinity();
  for (double t : ts)
    if (std::fabs(t) > 0.0) t_small = std::min(t_small, std::fabs(t));

  double f1_worst = -std::numeric_limits<double>::infinity();
  double f2_tail = std::numeric_limits<double>::infinity();
  double f2_defect = 0.0;
  double f3_worst = -std::numeric_limits<double>::infinity();
  double f4_ratio = 0.0;

  for (double x : positions) {
    for (double t : ts) {
      const double bound =
          spec.a(x) + spec.c * std::pow(std::fabs(t), spec.r - 1.0);
      f1_worst = std::max(f1_worst,
                          std::fabs(spec.f(x, t)) - bound - 1e-9 * (1.0 + bound));
      if (std::fabs(t) <= t_small * (1.0 + 1e-12) && std::fabs(t) > 0.0)
        f4_ratio = std::max(
            f4_ratio, std::fabs(spec.f(x, t)) / std::pow(std::fabs(t), p - 1.0));
    }

    // (f2): F/|t|^p along increasing |t| on each sign side, from |t| >= 1.
    for (int side = 0; side < 2; ++side) {
      std::vector<double> side_ts;
      for (double t : ts)
        if ((side == 0 && t >= 1.0) || (side == 1 && t <= -1.0))
          side_ts.push_back(t);
      if (side == 1) std::reverse(side_ts.begin(), side_ts.end());  // |t| asc
      double prev = -std::numeric_limits<double>::infinity();
      for (double t : side_ts) {
        const double h = spec.F(x, t) / std::pow(std::fabs(t), p);
        if (prev > -std::numeric_limits<double>::infinity())
          f2_defect = std::max(f2_defect, prev - h);
        prev = h;
      }
      if (!side_ts.empty()) f2_tail = std::min(f2_tail, prev);
    }

    // (f3): sigma quasi-monotone along |t| on each sign side.
    auto sigma = [&](double t) { return spec.f(x, t) * t - p * spec.F(x, t); };
    const double beta = spec.beta_star(x);
    for (int side = 0; side < 2; ++side) {
      std::vector<double> mags;
      for (double a : ts)
        if ((side == 0 && a > 0.0) || (side == 1 && a < 0.0)) mags.push_back(a);
      if (side == 1) std::reverse(mags.begin(), mags.end());
      for (std::size_t i = 0; i < mags.size(); ++i)
        for (std::size_t j = i; j < mags.size(); ++j) {
          const double s1 = sigma(mags[i]);
          const double s2 = sigma(mags[j]);
          const double rhs = spec.theta * s2 + beta;
          f3_worst = std::max(f3_worst, s1 - rhs - 1e-9 * (1.0 + std::fabs(rhs)));
        }
    }
  }

  rep.f1_worst = f1_worst;
  rep.f1 = f1_worst <= 0.0;
  rep.f2_tail_min = f2_tail;
  rep.f2_monotone_defect = f2_defect;
  rep.f2 = f2_tail >= 10.0 && f2_defect <= 1e-9;
  rep.f3_worst = f3_worst;
  rep.f3 = f3_worst <= 0.0;
  rep.f4_ratio = f4_ratio;
  rep.f4 = f4_ratio <= 0.05;
  return rep;
}

DiscreteFunction nehari_project(const DiscreteFunction& u,
                                const NonlinearitySpec& spec,
                                const QuadTable& table) {
  const double t = nehari_tstar(u, spec, table);
  DiscreteFunction out = u;
  for (double& v : out.values) v *= t;
  return out;
}

SolveReport mountain_pass_solve(SolveSign sign, const NonlinearitySpec& spec,
                                const QuadTable& table,
                                const std::vector<DiscreteFunction>& seeds,
                                const DescentConfig& cfg, double certify_tol) {
  if (seeds.empty())
    throw config_error("mountain_pass_solve: at least one seed required");

  if (sign == SolveSign::Minus) {
    const NonlinearitySpec rspec = reflect(spec);
    std::vector<DiscreteFunction> rseeds = seeds;
    for (DiscreteFunction& s : rseeds)
      for (double& v : s.values) v = -v;
    SolveReport rep =
        mountain_pass_solve(SolveSign::Plus, rspec, table, rseeds, cfg,
                            certify_tol);
    for (double& v : rep.u.values) v = -v;
    SolveReport out = make_report(std::move(rep.u), rep.grad_residual,
                                  rep.objective, rep.certified,
                                  std::move(rep.stats), rep.nehari_scale);
    return out;
  }

  std::vector<SolveReport> attempts;
  for (const DiscreteFunction& seed : seeds) {
    try {
      SolveReport rep = spec.model ? mp_nehari(spec, table, seed, cfg)
                                   : mp_path(spec, table, seed, cfg);
      rep.certified = rep.grad_residual <= certify_tol;
      attempts.push_back(std::move(rep));
    } catch (const domain_error&) {
      continue;  // seed outside the searchable cone
    }
  }
  if (attempts.empty())
    throw solver_error("mountain_pass_solve: no admissible seed", 0, 0.0);

  const SolveReport* best = &attempts.front();
  for (const SolveReport& rep : attempts) {
    if (rep.certified != best->certified) {
      if (rep.certified) best = &rep;
      continue;
    }
    if (rep.certified) {
      const bool rp = rep.objective > 0.0, bp = best->objective > 0.0;
      if (rp != bp) {
        if (rp) best = &rep;
      } else if (rep.objective < best->objective) {
        best = &rep;
      }
    } else if (rep.grad_residual < best->grad_residual) {
      best = &rep;
    }
  }
  return *best;
}

}  // namespace nln
