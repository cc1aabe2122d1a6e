#include "nln/forms.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "nln/detail/gauss.hpp"

namespace nln {

double j_p(double t, double p) {
  if (t == 0.0) return 0.0;
  return std::pow(std::abs(t), p - 2.0) * t;
}

namespace {
std::atomic<int> g_eval_threads{1};

constexpr int kBlock = 64;  // pairs per reduction block

// u(x) - u(y) at a quadrature point of a pair rule, assembled from nodal
// differences so it vanishes identically when all participating values are
// equal. Evaluating u(x) and u(y) separately leaves ~1-ulp junk in the
// difference, which J_p with p < 2 amplifies to junk^{p-1}: enough to hold
// gradient norms of flat states above grad_tol.
inline double point_diff(const PairRule& pr, const QuadPoint& q,
                         const std::vector<double>& u) {
  return (u[pr.n0a] - u[pr.n0b]) + q.tx * (u[pr.n1a] - u[pr.n0a]) -
         q.ty * (u[pr.n1b] - u[pr.n0b]);
}

template <class PerPair>
double block_reduce(const QuadTable& table, PerPair per_pair) {
  const auto& pairs = table.pairs;
  const int n_pairs = static_cast<int>(pairs.size());
  const int n_blocks = (n_pairs + kBlock - 1) / kBlock;
  std::vector<double> block_sums(n_blocks, 0.0);

  auto run = [&](int blk_lo, int blk_hi) {
    for (int b = blk_lo; b < blk_hi; ++b) {
      double s = 0.0;
      int lo = b * kBlock;
      int hi = std::min(n_pairs, lo + kBlock);
      for (int i = lo; i < hi; ++i) s += per_pair(pairs[i]);
      block_sums[b] = s;
    }
  };

  int nt = std::min(g_eval_threads.load(), n_blocks);
  if (nt <= 1) {
    run(0, n_blocks);
  } else {
    std::vector<std::thread> ts;
    for (int w = 0; w < nt; ++w) {
      int lo = n_blocks * w / nt;
      int hi = n_blocks * (w + 1) / nt;
      ts.emplace_back(run, lo, hi);
    }
    for (auto& t : ts) t.join();
  }
  double total = 0.0;
  for (double s : block_sums) total += s;  // fixed order
  return total;
}

}  // namespace

void set_eval_threads(int n) { g_eval_threads.store(n < 1 ? 1 : n); }
int eval_threads() { return g_eval_threads.load(); }

double DualVector::dual_norm() const {
  auto w = mesh->node_weights();
  double s = 0.0;
  for (size_t i = 0; i < v.size(); ++i) s += v[i] * v[i] / w[i];
  return std::sqrt(s);
}

double DualVector::dot(const std::vector<double>& nodal) const {
  double s = 0.0;
  for (size_t i = 0; i < v.size(); ++i) s += v[i] * nodal[i];
  return s;
}

FormValue gagliardo(const DiscreteFunction& u, const QuadTable& table) {
  const double p = table.params.p;
  const auto& U = u.values;
  double semi;
  if (p == 2.0) {
    semi = block_reduce(table, [&](const PairRule& pr) {
      double s = 0.0;
      for (const auto& q : pr.pts) {
        double d = point_diff(pr, q, U);
        s += q.w * q.k * d * d;
      }
      return s;
    });
  } else {
    semi = block_reduce(table, [&](const PairRule& pr) {
      double s = 0.0;
      for (const auto& q : pr.pts) {
        double d = point_diff(pr, q, U);
        s += q.w * q.k * std::pow(std::abs(d), p);
      }
      return s;
    });
  }
  FormValue fv;
  fv.seminorm_p = semi;
  fv.phi = 0.5 * semi;
  fv.mass_p = integrate_interior(u, table.params.quad_order,
                                 [p](double, double uu) {
                                   return std::pow(std::abs(uu), p);
                                 });
  fv.norm_p = fv.phi + fv.mass_p;
  return fv;
}

DualVector form_gradient(const DiscreteFunction& u, const QuadTable& table) {
  const double p = table.params.p;
  const auto& U = u.values;
  const auto& pairs = table.pairs;
  const int n_pairs = static_cast<int>(pairs.size());
  const int n = table.mesh->n_nodes();

  auto accumulate = [&](int lo, int hi, std::vector<double>& acc) {
    for (int ip = lo; ip < hi; ++ip) {
      const auto& pr = pairs[ip];
      for (const auto& q : pr.pts) {
        double d = point_diff(pr, q, U);
        double c = 0.5 * q.w * q.k *
                   (p == 2.0 ? d : (d == 0.0 ? 0.0 : std::pow(std::abs(d), p - 2.0) * d));
        // (phi_i(x) - phi_i(y)) for the four (or fewer) active nodes
        acc[pr.n0a] += c * (1.0 - q.tx);
        acc[pr.n1a] += c * q.tx;
        acc[pr.n0b] -= c * (1.0 - q.ty);
        acc[pr.n1b] -= c * q.ty;
      }
    }
  };

  DualVector g(*table.mesh);
  int nt = std::min(eval_threads(), std::max(1, n_pairs / kBlock));
  if (nt <= 1) {
    accumulate(0, n_pairs, g.v);
  } else {
    std::vector<std::vector<double>> partial(nt, std::vector<double>(n, 0.0));
    std::vector<std::thread> ts;
    for (int w = 0; w < nt; ++w) {
      int lo = n_pairs * w / nt;
      int hi = n_pairs * (w + 1) / nt;
      ts.emplace_back(accumulate, lo, hi, std::ref(partial[w]));
    }
    for (auto& t : ts) t.join();
    for (int w = 0; w < nt; ++w)  // fixed merge order
      for (int i = 0; i < n; ++i) g.v[i] += partial[w][i];
  }
  return g;
}

DualVector mass_gradient(const DiscreteFunction& u, const Params& params) {
  double p = params.p;
  return weighted_interior(u, params.quad_order,
                           [p](double, double uu) { return j_p(uu, p); });
}

namespace {

// Integrates g(x, u(x)) (optionally times each local hat) over one element,
// splitting at the zero of u when u changes sign inside.
template <class Emit>
void element_panels(const Mesh& mesh, const DiscreteFunction& u, int e,
                    int quad_order, Emit emit) {
  const auto& el = mesh.elements[e];
  double x0 = mesh.nodes[el.n0], x1 = mesh.nodes[el.n1];
  double v0 = u.values[el.n0], v1 = u.values[el.n1];
  const auto& rule = detail::cached_legendre(quad_order);

  auto panel = [&](double a, double b) {
    double len = b - a;
    if (len <= 0.0) return;
    for (int i = 0; i < rule.size(); ++i) {
      double x = a + len * rule.x[i];
      double t = (x - x0) / (x1 - x0);
      double ux = (1.0 - t) * v0 + t * v1;
      emit(x, ux, len * rule.w[i], t, el.n0, el.n1);
    }
  };

  if (v0 * v1 < 0.0) {
    double xr = x0 + (x1 - x0) * (v0 / (v0 - v1));
    panel(x0, xr);
    panel(xr, x1);
  } else {
    panel(x0, x1);
  }
}

}  // namespace

double integrate_interior(const DiscreteFunction& u, int quad_order,
                          const std::function<double(double, double)>& g) {
  const Mesh& mesh = *u.mesh;
  double total = 0.0;
  for (int e = 0; e < mesh.n_elements(); ++e) {
    if (mesh.elements[e].region != Region::Interior) continue;
    element_panels(mesh, u, e, quad_order,
                   [&](double x, double ux, double w, double, int, int) {
                     total += w * g(x, ux);
                   });
  }
  return total;
}

DualVector weighted_interior(const DiscreteFunction& u, int quad_order,
                             const std::function<double(double, double)>& g) {
  const Mesh& mesh = *u.mesh;
  DualVector out(mesh);
  for (int e = 0; e < mesh.n_elements(); ++e) {
    if (mesh.elements[e].region != Region::Interior) continue;
    element_panels(mesh, u, e, quad_order,
                   [&](double x, double ux, double w, double t, int n0, int n1) {
                     double gv = w * g(x, ux);
                     out.v[n0] += gv * (1.0 - t);
                     out.v[n1] += gv * t;
                   });
  }
  return out;
}

DualVector source_vector(const Mesh& mesh, int quad_order,
                         const std::function<double(double)>& f) {
  DualVector out(mesh);
  const auto& rule = detail::cached_legendre(quad_order);
  for (int e = 0; e < mesh.n_elements(); ++e) {
    const auto& el = mesh.elements[e];
    if (el.region != Region::Interior) continue;
    double x0 = mesh.nodes[el.n0], x1 = mesh.nodes[el.n1];
    double len = x1 - x0;
    for (int i = 0; i < rule.size(); ++i) {
      double t = rule.x[i];
      double x = x0 + len * t;
      double fv = len * rule.w[i] * f(x);
      out.v[el.n0] += fv * (1.0 - t);
      out.v[el.n1] += fv * t;
    }
  }
  return out;
}

DualVector interior_mass_apply(const Mesh& mesh, const std::vector<double>& z) {
  DualVector out(mesh);
  for (const auto& el : mesh.elements) {
    if (el.region != Region::Interior) continue;
    double h = mesh.nodes[el.n1] - mesh.nodes[el.n0];
    double z0 = z[el.n0], z1 = z[el.n1];
    out.v[el.n0] += h * (2.0 * z0 + z1) / 6.0;
    out.v[el.n1] += h * (z0 + 2.0 * z1) / 6.0;
  }
  return out;
}

double interior_l2_sq(const Mesh& mesh, const std::vector<double>& z) {
  double s = 0.0;
  for (const auto& el : mesh.elements) {
    if (el.region != Region::Interior) continue;
    double h = mesh.nodes[el.n1] - mesh.nodes[el.n0];
    double z0 = z[el.n0], z1 = z[el.n1];
    s += h * (z0 * z0 + z0 * z1 + z1 * z1) / 3.0;
  }
  return s;
}

double power_diff(double x, double h, double p) {
  if (h == 0.0) return 0.0;
  double y = x + h;
  if (x == 0.0) return std::pow(std::abs(y), p);
  if (y == 0.0) return -std::pow(std::abs(x), p);
  if ((x > 0.0) == (y > 0.0)) {
    double r = h / x;  // r > -1 when x and y share a sign
    if (std::abs(r) < 0.5)
      return std::pow(std::abs(x), p) * std::expm1(p * std::log1p(r));
  }
  return std::pow(std::abs(y), p) - std::pow(std::abs(x), p);
}

double gagliardo_delta(const DiscreteFunction& u, const std::vector<double>& dir,
                       double alpha, const QuadTable& table) {
  double p = table.params.p;
  const auto& U = u.values;
  return block_reduce(table, [&](const PairRule& pr) {
    double s = 0.0;
    for (const auto& q : pr.pts) {
      double du = point_diff(pr, q, U);
      double dd = point_diff(pr, q, dir);
      s += q.w * q.k * power_diff(du, alpha * dd, p);
    }
    return s;
  });
}

double interior_power_delta(const DiscreteFunction& u,
                            const std::vector<double>& dir, double alpha,
                            double p, int quad_order) {
  const Mesh& mesh = *u.mesh;
  const auto& rule = detail::cached_legendre(quad_order);
  double total = 0.0;
  for (int e = 0; e < mesh.n_elements(); ++e) {
    const auto& el = mesh.elements[e];
    if (el.region != Region::Interior) continue;
    double h = mesh.element_length(e);
    double u0 = u.values[el.n0], u1 = u.values[el.n1];
    double d0 = dir[el.n0], d1 = dir[el.n1];
    double v0 = u0 + alpha * d0, v1 = u1 + alpha * d1;
    // Panels split at the sign changes of both the old and the new iterate.
    double ts[4] = {0.0, 1.0, 0.0, 0.0};
    int nt = 2;
    if (u0 * u1 < 0.0) ts[nt++] = u0 / (u0 - u1);
    if (v0 * v1 < 0.0) ts[nt++] = v0 / (v0 - v1);
    std::sort(ts, ts + nt);
    for (int k = 0; k + 1 < nt; ++k) {
      double ta = ts[k], tb = ts[k + 1];
      if (!(tb > ta)) continue;
      for (int i = 0; i < rule.size(); ++i) {
        double t = ta + (tb - ta) * rule.x[i];
        double ut = (1.0 - t) * u0 + t * u1;
        double dt = (1.0 - t) * d0 + t * d1;
        total += h * (tb - ta) * rule.w[i] * power_diff(ut, alpha * dt, p);
      }
    }
  }
  return total;
}

double interior_l2_delta(const Mesh& mesh, const std::vector<double>& z,
                         const std::vector<double>& dir, double alpha) {
  double zd = 0.0, dd = 0.0;
  for (const auto& el : mesh.elements) {
    if (el.region != Region::Interior) continue;
    double h = mesh.nodes[el.n1] - mesh.nodes[el.n0];
    double z0 = z[el.n0], z1 = z[el.n1];
    double d0 = dir[el.n0], d1 = dir[el.n1];
    zd += h * (2.0 * z0 * d0 + z0 * d1 + z1 * d0 + 2.0 * z1 * d1) / 6.0;
    dd += h * (d0 * d0 + d0 * d1 + d1 * d1) / 3.0;
  }
  return alpha * (2.0 * zd + alpha * dd);
}

}  // namespace nln
