#include "nln/quadrature.hpp"

#include <algorithm>
#include <cmath>

#include "nln/detail/gauss.hpp"

namespace nln {

double kernel(double x, double y, const Params& params) {
  double d = std::abs(x - y);
  if (d == 0.0) throw domain_error("kernel: evaluation on the diagonal");
  return std::pow(d, -(1.0 + params.ps()));
}

double tail_weight(double x, const Mesh& mesh, const Params& params) {
  double dl = x - mesh.left_edge();
  double dr = mesh.right_edge() - x;
  if (dl <= 0.0 || dr <= 0.0)
    throw domain_error("tail_weight: x must lie strictly inside the collar");
  double ps = params.ps();
  return (std::pow(dl, -ps) + std::pow(dr, -ps)) / ps;
}

std::size_t QuadTable::total_points() const {
  std::size_t n = 0;
  for (const auto& p : pairs) n += p.pts.size();
  return n;
}

namespace {

using detail::Rule1D;

void push_point(PairRule& pr, double x, double y, double w, const Params& params) {
  QuadPoint q;
  q.x = x;
  q.y = y;
  q.w = w;
  q.k = kernel(x, y, params);
  q.tx = 0.0;  // set by caller via finalize
  q.ty = 0.0;
  pr.pts.push_back(q);
}

void finalize_coords(PairRule& pr, const Mesh& mesh) {
  for (auto& q : pr.pts) {
    q.tx = mesh.local_coord(pr.ea, q.x);
    q.ty = mesh.local_coord(pr.eb, q.y);
  }
}

// E x E: fold onto {y = x + z, z > 0} plus mirror. Exact in the separation
// variable for the table's integrand class (piecewise-linear u makes the
// z-dependence a pure power z^{p-1-ps}).
void build_same(PairRule& pr, double lo, double hi, const Rule1D& zr,
                const Rule1D& xr, const Params& params) {
  double h = hi - lo;
  for (int j = 0; j < zr.size(); ++j) {
    double z = h * zr.x[j];
    double wz = h * zr.w[j];
    double len = h - z;
    for (int i = 0; i < xr.size(); ++i) {
      double x = lo + len * xr.x[i];
      double w = wz * len * xr.w[i];
      push_point(pr, x, x + z, w, params);
      push_point(pr, x + z, x, w, params);
    }
  }
}

// E=(e0,c), F=(c,e2) sharing node c: polar/Duffy split about the corner. The
// radial direction carries weight u^{p-ps}; the angular integrand is smooth
// for the table's integrand class.
void build_corner(PairRule& pr, double c, double hE, double hF,
                  const Rule1D& rad, const Rule1D& ang, const Params& params) {
  for (int i = 0; i < rad.size(); ++i) {
    double zeta = rad.x[i];
    double wr = rad.w[i] * zeta * hE * hF;
    for (int j = 0; j < ang.size(); ++j) {
      double sig = ang.x[j];
      double w = wr * ang.w[j];
      // split u_hat >= v_hat
      push_point(pr, c - hE * zeta, c + hF * zeta * sig, w, params);
      // split v_hat > u_hat
      push_point(pr, c - hE * zeta * sig, c + hF * zeta, w, params);
    }
  }
}

void build_tensor(PairRule& pr, double a0, double a1, double b0, double b1,
                  const Rule1D& ra, const Rule1D& rb, const Params& params) {
  for (int i = 0; i < ra.size(); ++i) {
    double x = a0 + (a1 - a0) * ra.x[i];
    double wx = (a1 - a0) * ra.w[i];
    for (int j = 0; j < rb.size(); ++j) {
      double y = b0 + (b1 - b0) * rb.x[j];
      double w = wx * (b1 - b0) * rb.w[j];
      push_point(pr, x, y, w, params);
    }
  }
}

}  // namespace

QuadTable build_quad_table(const Mesh& mesh, const Params& params) {
  params.validate();
  QuadTable table;
  table.mesh = &mesh;
  table.params = params;

  const double alpha = params.p - 1.0 - params.ps();  // > -1 since s < 1
  const int q = params.quad_order;

  const Rule1D z_rule = detail::gauss_jacobi_absorbed(q, alpha);
  const Rule1D rad_rule = detail::gauss_jacobi_absorbed(q, alpha + 1.0);
  const Rule1D ang_rule = detail::gauss_legendre(2 * q + 4);
  const Rule1D leg_q = detail::gauss_legendre(q);
  const Rule1D leg_near = detail::gauss_legendre(q + 4);
  const Rule1D leg_mid = detail::gauss_legendre(q + 2);

  const int ne = mesh.n_elements();
  for (int ea = 0; ea < ne; ++ea) {
    for (int eb = ea; eb < ne; ++eb) {
      const auto& A = mesh.elements[ea];
      const auto& B = mesh.elements[eb];
      if (A.region == Region::Exterior && B.region == Region::Exterior) continue;

      PairRule pr;
      pr.ea = ea;
      pr.eb = eb;
      pr.n0a = A.n0;
      pr.n1a = A.n1;
      pr.n0b = B.n0;
      pr.n1b = B.n1;

      if (ea == eb) {
        build_same(pr, mesh.nodes[A.n0], mesh.nodes[A.n1], z_rule, leg_q, params);
      } else if (A.n1 == B.n0) {
        build_corner(pr, mesh.nodes[A.n1], mesh.element_length(ea),
                     mesh.element_length(eb), rad_rule, ang_rule, params);
        for (auto& qp : pr.pts) qp.w *= 2.0;  // covers (F,E) as well
      } else {
        double gap = mesh.element_gap(ea, eb);
        double h = std::max(mesh.element_length(ea), mesh.element_length(eb));
        const Rule1D& r = (gap < h) ? leg_near : (gap < 3.0 * h ? leg_mid : leg_q);
        build_tensor(pr, mesh.nodes[A.n0], mesh.nodes[A.n1], mesh.nodes[B.n0],
                     mesh.nodes[B.n1], r, r, params);
        for (auto& qp : pr.pts) qp.w *= 2.0;
      }
      finalize_coords(pr, mesh);
      table.pairs.push_back(std::move(pr));
    }
  }

  for (int i = 0; i < mesh.n_nodes(); ++i) {
    if (mesh.node_region(i) != Region::Interior) continue;
    table.tail_node_ids.push_back(i);
    table.tail_values.push_back(tail_weight(mesh.nodes[i], mesh, params));
  }
  double max_tail = 0.0;
  for (double t : table.tail_values) max_tail = std::max(max_tail, t);
  table.collar_flagged = max_tail > 2.0;
  return table;
}

Eigen::MatrixXd QuadTable::dense_matrix_p2() const {
  if (params.p != 2.0)
    throw domain_error("dense_matrix_p2: quadratic form view requires p == 2");
  const int n = mesh->n_nodes();
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n, n);
  int ids[4];
  double phix[4], phiy[4];
  for (const auto& pr : pairs) {
    for (const auto& qp : pr.pts) {
      int m = 0;
      auto add = [&](int id, double px, double py) {
        for (int k = 0; k < m; ++k) {
          if (ids[k] == id) {
            phix[k] += px;
            phiy[k] += py;
            return;
          }
        }
        ids[m] = id;
        phix[m] = px;
        phiy[m] = py;
        ++m;
      };
      add(pr.n0a, 1.0 - qp.tx, 0.0);
      add(pr.n1a, qp.tx, 0.0);
      add(pr.n0b, 0.0, 1.0 - qp.ty);
      add(pr.n1b, 0.0, qp.ty);
      double wk = qp.w * qp.k;
      for (int i = 0; i < m; ++i) {
        double di = phix[i] - phiy[i];
        for (int j = 0; j < m; ++j) {
          double dj = phix[j] - phiy[j];
          K(ids[i], ids[j]) += wk * di * dj;
        }
      }
    }
  }
  // enforce exact symmetry against fp accumulation order
  K = 0.5 * (K + K.transpose()).eval();
  return K;
}

}  // namespace nln
