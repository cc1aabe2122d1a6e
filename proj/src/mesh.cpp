#include "nln/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace nln {

double Mesh::element_gap(int e, int f) const {
  const auto& E = elements[e];
  const auto& F = elements[f];
  double lo_e = nodes[E.n0], hi_e = nodes[E.n1];
  double lo_f = nodes[F.n0], hi_f = nodes[F.n1];
  if (hi_e <= lo_f) return lo_f - hi_e;
  if (hi_f <= lo_e) return lo_e - hi_f;
  return 0.0;
}

int Mesh::locate(double x) const {
  if (x < left_edge() || x > right_edge())
    throw domain_error("mesh: point " + std::to_string(x) + " outside collar");
  // nodes sorted; upper_bound gives first node > x
  auto it = std::upper_bound(nodes.begin(), nodes.end(), x);
  int idx = static_cast<int>(it - nodes.begin()) - 1;
  idx = std::clamp(idx, 0, n_elements() - 1);
  return idx;
}

std::vector<double> Mesh::node_weights() const {
  std::vector<double> w(nodes.size(), 0.0);
  for (const auto& el : elements) {
    double half = 0.5 * (nodes[el.n1] - nodes[el.n0]);
    w[el.n0] += half;
    w[el.n1] += half;
  }
  return w;
}

std::vector<int> Mesh::interior_node_ids() const {
  std::vector<int> ids;
  for (int i = 0; i < n_nodes(); ++i)
    if (node_region(i) == Region::Interior) ids.push_back(i);
  return ids;
}

std::vector<int> Mesh::exterior_node_ids() const {
  std::vector<int> ids;
  for (int i = 0; i < n_nodes(); ++i)
    if (node_region(i) == Region::Exterior) ids.push_back(i);
  return ids;
}

Mesh build_mesh(double a, double b, int n_interior, double collar, int n_exterior) {
  if (!(b > a)) throw config_error("mesh: domain requires b > a");
  if (n_interior < 2) throw config_error("mesh: n_interior must be >= 2");
  if (n_exterior < 1) throw config_error("mesh: n_exterior must be >= 1");
  if (!(collar > 0.0)) throw config_error("mesh: collar must be positive");

  Mesh m;
  m.a = a;
  m.b = b;
  m.collar = collar;
  m.n_interior = n_interior;
  m.n_exterior = n_exterior;

  const double hL = collar / n_exterior;
  const double hI = (b - a) / n_interior;
  // left collar nodes a-R .. a (exclusive of a), interior a .. b, right collar
  for (int i = 0; i < n_exterior; ++i) m.nodes.push_back(a - collar + i * hL);
  for (int i = 0; i <= n_interior; ++i) m.nodes.push_back(a + i * hI);
  for (int i = 1; i <= n_exterior; ++i) m.nodes.push_back(b + i * hL);
  // snap endpoints exactly
  m.nodes[n_exterior] = a;
  m.nodes[n_exterior + n_interior] = b;
  m.nodes.front() = a - collar;
  m.nodes.back() = b + collar;

  for (int i = 0; i + 1 < m.n_nodes(); ++i) {
    Region reg = (m.nodes[i] >= a && m.nodes[i + 1] <= b) ? Region::Interior
                                                          : Region::Exterior;
    m.elements.push_back({i, i + 1, reg});
  }
  return m;
}

double DiscreteFunction::operator()(double x) const {
  if (x < mesh->left_edge() || x > mesh->right_edge()) return 0.0;
  int e = mesh->locate(x);
  double t = mesh->local_coord(e, x);
  const auto& el = mesh->elements[e];
  return (1.0 - t) * values[el.n0] + t * values[el.n1];
}

namespace {
template <class Pred, class Cmp>
double extremum(const DiscreteFunction& u, Pred keep, Cmp better, double init) {
  double best = init;
  bool found = false;
  for (int i = 0; i < u.mesh->n_nodes(); ++i) {
    if (!keep(i)) continue;
    if (!found || better(u.values[i], best)) best = u.values[i];
    found = true;
  }
  if (!found) throw domain_error("discrete function: empty node class");
  return best;
}
}  // namespace

double DiscreteFunction::min_interior() const {
  return extremum(*this, [&](int i) { return mesh->node_region(i) == Region::Interior; },
                  std::less<double>(), 0.0);
}
double DiscreteFunction::max_interior() const {
  return extremum(*this, [&](int i) { return mesh->node_region(i) == Region::Interior; },
                  std::greater<double>(), 0.0);
}
double DiscreteFunction::min_exterior() const {
  return extremum(*this, [&](int i) { return mesh->node_region(i) == Region::Exterior; },
                  std::less<double>(), 0.0);
}
double DiscreteFunction::max_exterior() const {
  return extremum(*this, [&](int i) { return mesh->node_region(i) == Region::Exterior; },
                  std::greater<double>(), 0.0);
}

DiscreteFunction interpolate(const Mesh& mesh, const std::function<double(double)>& f) {
  DiscreteFunction u(mesh);
  for (int i = 0; i < mesh.n_nodes(); ++i) {
    double v = f(mesh.nodes[i]);
    if (!std::isfinite(v))
      throw domain_error("interpolate: non-finite value at node " + std::to_string(i));
    u.values[i] = v;
  }
  return u;
}

}  // namespace nln
