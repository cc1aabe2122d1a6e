#include "nln/solvers.hpp"

#include <algorithm>
#include <cmath>

#include "nln/errors.hpp"

namespace nln {

namespace {

std::pair<DiscreteFunction, SolveStats> descend_impl(
    const ObjectiveFn& value, const GradientFn& gradient, const DeltaFn* delta,
    const DiscreteFunction& u0, const DescentConfig& cfg) {
  DiscreteFunction u = u0;
  const Mesh& mesh = *u.mesh;
  const auto w = mesh.node_weights();
  const int n = mesh.n_nodes();

  SolveStats stats;
  double fu = value(u);
  if (!std::isfinite(fu)) throw solver_error("descend: non-finite objective at start", 0, 0.0);
  stats.objective_trace.push_back(fu);

  // Limited-memory quasi-Newton (L-BFGS two-loop) directions with monotone
  // Armijo backtracking. The inverse-Hessian seed is the scaled inverse of the
  // diagonal mesh metric, so the first step and every restart reduce to
  // mesh-independent steepest descent. Curvature pairs with unreliable s.y
  // are skipped, and any non-descent direction triggers a memory flush.
  constexpr int kMem = 10;
  std::vector<std::vector<double>> mem_s, mem_y;
  std::vector<double> mem_rho;
  std::vector<double> dir(n, 0.0), g_old(n, 0.0), q(n, 0.0);
  std::vector<double> al(kMem, 0.0);
  double alpha_old = 0.0, dec_old = 0.0;
  bool have_prev = false;

  for (int it = 0; it < cfg.max_iter; ++it) {
    DualVector g = gradient(u);
    double gn = g.dual_norm();
    stats.grad_norm = gn;
    stats.iterations = it;
    if (gn <= cfg.grad_tol) {
      stats.converged = true;
      return {u, stats};
    }

    const double gg = gn * gn;  // <g, W^{-1} g>
    if (have_prev) {
      // store the newest curvature pair (s = accepted step, y = grad change)
      std::vector<double> s(n), y(n);
      double sy = 0.0, snorm = 0.0, ynorm = 0.0;
      for (int i = 0; i < n; ++i) {
        s[i] = alpha_old * dir[i];
        y[i] = g.v[i] - g_old[i];
        sy += s[i] * y[i];
        snorm += s[i] * s[i];
        ynorm += y[i] * y[i];
      }
      if (sy > 1e-12 * std::sqrt(snorm * ynorm)) {
        if (static_cast<int>(mem_s.size()) == kMem) {
          mem_s.erase(mem_s.begin());
          mem_y.erase(mem_y.begin());
          mem_rho.erase(mem_rho.begin());
        }
        mem_s.push_back(std::move(s));
        mem_y.push_back(std::move(y));
        mem_rho.push_back(1.0 / sy);
      }
    }

    // two-loop recursion, H0 = gamma * W^{-1}
    double slope = 0.0;
    const int m = static_cast<int>(mem_s.size());
    if (m > 0) {
      for (int i = 0; i < n; ++i) q[i] = g.v[i];
      for (int k = m - 1; k >= 0; --k) {
        double sq = 0.0;
        for (int i = 0; i < n; ++i) sq += mem_s[k][i] * q[i];
        al[k] = mem_rho[k] * sq;
        for (int i = 0; i < n; ++i) q[i] -= al[k] * mem_y[k][i];
      }
      double yy = 0.0, sy = 0.0;
      for (int i = 0; i < n; ++i) {
        yy += mem_y[m - 1][i] * mem_y[m - 1][i] / w[i];
        sy += mem_s[m - 1][i] * mem_y[m - 1][i];
      }
      const double gamma = (yy > 0.0) ? sy / yy : 1.0;
      for (int i = 0; i < n; ++i) dir[i] = gamma * q[i] / w[i];
      for (int k = 0; k < m; ++k) {
        double yr = 0.0;
        for (int i = 0; i < n; ++i) yr += mem_y[k][i] * dir[i];
        const double b = al[k] - mem_rho[k] * yr;
        for (int i = 0; i < n; ++i) dir[i] += b * mem_s[k][i];
      }
      for (int i = 0; i < n; ++i) dir[i] = -dir[i];
      for (int i = 0; i < n; ++i) slope += g.v[i] * dir[i];
    }
    if (m == 0 || !(slope < -1e-14 * gg)) {  // flush stale curvature memory
      mem_s.clear();
      mem_y.clear();
      mem_rho.clear();
      for (int i = 0; i < n; ++i) dir[i] = -g.v[i] / w[i];
      slope = -gg;
    }

    double alpha = 1.0;
    if (mem_s.empty()) {  // steepest step: seed from the last accepted decrease
      alpha = cfg.initial_step;
      if (have_prev) {
        const double est = 2.0 * dec_old / slope;
        if (std::isfinite(est) && est > 0.0)
          alpha = std::clamp(est, 1e-12, 1e10);
        else
          alpha = std::clamp(alpha_old, 1e-12, 1e10);
      }
    }

    for (int i = 0; i < n; ++i) g_old[i] = g.v[i];

    bool accepted = false;
    if (delta) {
      for (int bt = 0; bt < cfg.max_backtracks; ++bt) {
        double dc = (*delta)(u, dir, alpha);
        if (std::isfinite(dc) && dc <= cfg.armijo_c * alpha * slope) {
          for (int i = 0; i < n; ++i) u.values[i] += alpha * dir[i];
          fu += dc;
          dec_old = dc;
          accepted = true;
          break;
        }
        alpha *= cfg.backtrack_ratio;
      }
    } else {
      DiscreteFunction cand = u;
      for (int bt = 0; bt < cfg.max_backtracks; ++bt) {
        for (int i = 0; i < n; ++i) cand.values[i] = u.values[i] + alpha * dir[i];
        double fc = value(cand);
        if (std::isfinite(fc) && fc <= fu + cfg.armijo_c * alpha * slope) {
          u = cand;
          dec_old = fc - fu;
          fu = fc;
          accepted = true;
          break;
        }
        alpha *= cfg.backtrack_ratio;
      }
    }
    alpha_old = alpha;
    have_prev = accepted;
    if (!accepted) {
      if (gn <= 50.0 * cfg.grad_tol) {  // fp floor next to the optimum
        stats.converged = true;
        return {u, stats};
      }
      throw solver_error("descend: line search found no decrease", it, gn);
    }
    stats.objective_trace.push_back(fu);
  }
  stats.iterations = cfg.max_iter;
  return {u, stats};
}

}  // namespace

std::pair<DiscreteFunction, SolveStats> descend(const ObjectiveFn& value,
                                                const GradientFn& gradient,
                                                const DiscreteFunction& u0,
                                                const DescentConfig& cfg) {
  return descend_impl(value, gradient, nullptr, u0, cfg);
}

std::pair<DiscreteFunction, SolveStats> descend(const ObjectiveFn& value,
                                                const GradientFn& gradient,
                                                const DeltaFn& delta,
                                                const DiscreteFunction& u0,
                                                const DescentConfig& cfg) {
  return descend_impl(value, gradient, &delta, u0, cfg);
}

std::pair<DiscreteFunction, SolveStats> prox_step(const DiscreteFunction& u_prev,
                                                  double tau,
                                                  const QuadTable& table,
                                                  const DescentConfig& cfg) {
  if (!(tau > 0.0)) throw domain_error("prox_step: tau must be positive");
  const Mesh& mesh = *u_prev.mesh;
  const double p = table.params.p;

  auto value = [&](const DiscreteFunction& v) {
    std::vector<double> d(v.values.size());
    for (size_t i = 0; i < d.size(); ++i) d[i] = v.values[i] - u_prev.values[i];
    double quad = interior_l2_sq(mesh, d) / (2.0 * tau);
    return quad + gagliardo(v, table).seminorm_p / p;
  };
  auto gradient = [&](const DiscreteFunction& v) {
    std::vector<double> d(v.values.size());
    for (size_t i = 0; i < d.size(); ++i) d[i] = v.values[i] - u_prev.values[i];
    DualVector g = interior_mass_apply(mesh, d);
    DualVector fg = form_gradient(v, table);
    for (size_t i = 0; i < g.v.size(); ++i) g.v[i] = g.v[i] / tau + 2.0 * fg.v[i];
    return g;
  };
  auto delta = [&](const DiscreteFunction& v, const std::vector<double>& dir,
                   double alpha) {
    std::vector<double> d(v.values.size());
    for (size_t i = 0; i < d.size(); ++i) d[i] = v.values[i] - u_prev.values[i];
    return interior_l2_delta(mesh, d, dir, alpha) / (2.0 * tau) +
           gagliardo_delta(v, dir, alpha, table) / p;
  };
  return descend(value, gradient, delta, u_prev, cfg);
}

double root_find_monotone(const std::function<double(double)>& phi, double lo,
                          double hi, double tol) {
  if (!(hi >= lo)) throw domain_error("root_find_monotone: empty bracket");
  double fa = phi(lo);
  double fb = phi(hi);
  if (fa > 0.0 || fb < 0.0)
    throw domain_error("root_find_monotone: bracket does not sign-separate");
  if (fa == 0.0) return lo;
  if (fb == 0.0) return hi;

  double a = lo, b = hi;
  double last_width = b - a;
  int since_shrink = 0;
  while (b - a > tol) {
    double t = b - fb * (b - a) / (fb - fa);  // secant
    if (!std::isfinite(t) || t <= a || t >= b || since_shrink >= 2)
      t = 0.5 * (a + b);
    double ft = phi(t);
    if (ft == 0.0) return t;
    if (ft < 0.0) {
      a = t;
      fa = ft;
    } else {
      b = t;
      fb = ft;
    }
    if (b - a < 0.5 * last_width) {
      last_width = b - a;
      since_shrink = 0;
    } else {
      ++since_shrink;
    }
  }
  return 0.5 * (a + b);
}

}  // namespace nln
