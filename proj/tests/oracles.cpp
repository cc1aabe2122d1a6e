#include "oracles.hpp"

#include <algorithm>
#include <cmath>

#include "nln/forms.hpp"
#include "nln/quadrature.hpp"

namespace oracle {
namespace {

double simpson(double a, double fa, double fm, double b, double fb) {
  return (b - a) * (fa + 4.0 * fm + fb) / 6.0;
}

double adapt(const std::function<double(double)>& f, double a, double fa,
             double m, double fm, double b, double fb, double whole,
             double tol, int depth) {
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = f(lm), frm = f(rm);
  double left = simpson(a, fa, flm, m, fm);
  double right = simpson(m, fm, frm, b, fb);
  double err = left + right - whole;
  if (depth <= 0 || std::abs(err) <= 15.0 * tol)
    return left + right + err / 15.0;
  return adapt(f, a, fa, lm, flm, m, fm, left, 0.5 * tol, depth - 1) +
         adapt(f, m, fm, rm, frm, b, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b,
                 double tol, int max_depth) {
  if (!(b > a)) return 0.0;
  double m = 0.5 * (a + b);
  double fa = f(a), fm = f(m), fb = f(b);
  return adapt(f, a, fa, m, fm, b, fb, simpson(a, fa, fm, b, fb), tol,
               max_depth);
}

double seminorm_p(const nln::DiscreteFunction& u, const nln::Params& params,
                  double tol) {
  const nln::Mesh& mesh = *u.mesh;
  const double p = params.p;
  const double ps = params.ps();
  const double lo = mesh.left_edge(), hi = mesh.right_edge();

  // Element slope at a point strictly inside element e.
  auto slope = [&](int e) {
    const auto& el = mesh.elements[e];
    return (u.values[el.n1] - u.values[el.n0]) / mesh.element_length(e);
  };

  // Inner integral over [ya, yb] for fixed x: split at nodes and at x, exact
  // antiderivative on the (at most two) pieces whose closure touches x.
  auto inner = [&](double x, double ya, double yb, double itol) {
    std::vector<double> cuts{ya, yb};
    for (double nd : mesh.nodes)
      if (nd > ya && nd < yb) cuts.push_back(nd);
    if (x > ya && x < yb) cuts.push_back(x);
    std::sort(cuts.begin(), cuts.end());
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
      double c = cuts[k], d = cuts[k + 1];
      if (!(d > c)) continue;
      if (c == x || d == x) {
        // same-element piece: |u(x)-u(y)| = |m| |x-y| exactly
        double mid = 0.5 * (c + d);
        double m = slope(mesh.locate(mid));
        double len = d - c;
        total += std::pow(std::abs(m), p) * std::pow(len, p - ps) / (p - ps);
      } else {
        total += integrate(
            [&](double y) {
              return std::pow(std::abs(u(x) - u(y)), p) *
                     std::pow(std::abs(x - y), -1.0 - ps);
            },
            c, d, itol);
      }
    }
    return total;
  };

  double total = 0.0;
  const double itol = tol / (10.0 * mesh.n_elements());
  for (int e = 0; e < mesh.n_elements(); ++e) {
    const auto& el = mesh.elements[e];
    double x0 = mesh.nodes[el.n0], x1 = mesh.nodes[el.n1];
    bool interior = el.region == nln::Region::Interior;
    auto fx = [&](double x) {
      return interior ? inner(x, lo, hi, itol * 1e-2)
                      : inner(x, mesh.a, mesh.b, itol * 1e-2);
    };
    total += integrate(fx, x0, x1, itol);
  }
  return total;
}

double plap_pv(const std::function<double(double)>& u, double x,
               const nln::Mesh& mesh, const nln::Params& params,
               double window, double tol) {
  const double p = params.p;
  const double ps = params.ps();
  const double lo = mesh.left_edge(), hi = mesh.right_edge();
  auto jp = [&](double t) { return nln::j_p(t, p); };

  // symmetric pairing inside the window kills the singularity for C^2 u
  double ux = u(x);
  double paired = integrate(
      [&](double t) {
        return (jp(ux - u(x + t)) + jp(ux - u(x - t))) *
               std::pow(t, -1.0 - ps);
      },
      1e-9, window, tol);

  auto outer = [&](double ya, double yb) {
    if (!(yb > ya)) return 0.0;
    return integrate(
        [&](double y) {
          return jp(ux - u(y)) * std::pow(std::abs(x - y), -1.0 - ps);
        },
        ya, yb, tol);
  };
  return paired + outer(lo, x - window) + outer(x + window, hi);
}

double extension_ratio_p2(const nln::DiscreteFunction& u, double x,
                          const nln::Params& params, double tol) {
  const nln::Mesh& mesh = *u.mesh;
  const double ps = params.ps();
  double num = 0.0, den = 0.0;
  for (int e = 0; e < mesh.n_elements(); ++e) {
    const auto& el = mesh.elements[e];
    if (el.region != nln::Region::Interior) continue;
    double x0 = mesh.nodes[el.n0], x1 = mesh.nodes[el.n1];
    num += integrate(
        [&](double y) { return u(y) * std::pow(std::abs(x - y), -1.0 - ps); },
        x0, x1, tol);
    den += integrate(
        [&](double y) { return std::pow(std::abs(x - y), -1.0 - ps); }, x0, x1,
        tol);
  }
  return num / den;
}

std::vector<std::vector<double>> interior_mass_matrix(const nln::Mesh& mesh) {
  int n = mesh.n_nodes();
  std::vector<std::vector<double>> m(n, std::vector<double>(n, 0.0));
  for (const auto& el : mesh.elements) {
    if (el.region != nln::Region::Interior) continue;
    double h = mesh.nodes[el.n1] - mesh.nodes[el.n0];
    m[el.n0][el.n0] += h / 3.0;
    m[el.n1][el.n1] += h / 3.0;
    m[el.n0][el.n1] += h / 6.0;
    m[el.n1][el.n0] += h / 6.0;
  }
  return m;
}

}  // namespace oracle
