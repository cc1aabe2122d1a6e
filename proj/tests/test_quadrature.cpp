#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "nln/errors.hpp"
#include "nln/forms.hpp"
#include "nln/mesh.hpp"
#include "nln/quadrature.hpp"
#include "oracles.hpp"

using namespace nln;

namespace {

Params make_params(double p, double s, double collar, int q = 6) {
  Params prm;
  prm.p = p;
  prm.s = s;
  prm.collar = collar;
  prm.quad_order = q;
  return prm;
}

DiscreteFunction hat_at(const Mesh& mesh, int node) {
  DiscreteFunction u(mesh);
  u.values[node] = 1.0;
  return u;
}

}  // namespace

TEST_CASE("kernel evaluates |x-y|^{-(1+ps)}") {
  Params prm = make_params(2.0, 0.5, 1.0);
  CHECK(kernel(0.0, 1.0, prm) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(kernel(0.0, 0.5, prm) == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(kernel(0.25, -0.25, prm) == doctest::Approx(4.0).epsilon(1e-14));
  CHECK_THROWS_AS(kernel(0.3, 0.3, prm), domain_error);
}

TEST_CASE("tail weight matches the analytic antiderivative per side") {
  // geometry with distance exactly 1 from the midpoint to both collar edges
  Mesh m = build_mesh(0.0, 1.0, 2, 0.5, 1);
  Params p2 = make_params(2.0, 0.5, 0.5);  // ps = 1
  CHECK(tail_weight(0.5, m, p2) == doctest::Approx(2.0).epsilon(1e-13));
  Params p3 = make_params(3.0, 0.5, 0.5);  // ps = 1.5
  CHECK(tail_weight(0.5, m, p3) == doctest::Approx(2.0 * 2.0 / 3.0).epsilon(1e-13));
  // off-center: d^{-ps}/ps with d = 0.75 and 1.25
  double expect = std::pow(0.75, -1.0) + std::pow(1.25, -1.0);
  CHECK(tail_weight(0.25, m, p2) == doctest::Approx(expect).epsilon(1e-13));
}

TEST_CASE("table covers no exterior-exterior pair and has positive weights") {
  Mesh m = build_mesh(0.0, 1.0, 4, 1.0, 2);
  Params prm = make_params(2.0, 0.5, 1.0);
  QuadTable t = build_quad_table(m, prm);
  CHECK(t.total_points() > 0);
  for (const auto& pr : t.pairs) {
    bool a_int = m.elements[pr.ea].region == Region::Interior;
    bool b_int = m.elements[pr.eb].region == Region::Interior;
    CHECK((a_int || b_int));
    for (const auto& q : pr.pts) {
      CHECK(q.w > 0.0);
      CHECK(std::isfinite(q.w));
      CHECK(std::isfinite(q.k));
      CHECK(q.k > 0.0);
    }
  }
}

TEST_CASE("constants have zero seminorm through the table") {
  Mesh m = build_mesh(0.0, 1.0, 2, 0.5, 1);
  Params prm = make_params(2.0, 0.5, 0.5);
  QuadTable t = build_quad_table(m, prm);
  DiscreteFunction c = interpolate(m, [](double) { return 3.7; });
  CHECK(gagliardo(c, t).seminorm_p == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("table seminorm matches the adaptive double-integral oracle") {
  // hat at an interior node, several (p, s) pairs, small meshes
  struct Case {
    double p, s;
    int n_int, n_ext;
    double collar;
  };
  const Case cases[] = {
      {2.0, 0.25, 4, 2, 1.0},  // 8 elements
      {2.0, 0.5, 2, 1, 0.5},   // 4 elements
      {1.5, 0.5, 2, 1, 0.5},
      {3.0, 0.75, 2, 1, 0.5},
  };
  for (const auto& c : cases) {
    CAPTURE(c.p);
    CAPTURE(c.s);
    Mesh m = build_mesh(0.0, 1.0, c.n_int, c.collar, c.n_ext);
    Params prm = make_params(c.p, c.s, c.collar);
    QuadTable t = build_quad_table(m, prm);
    int node = m.interior_node_ids()[1];  // first node strictly inside
    DiscreteFunction u = hat_at(m, node);
    double table_val = gagliardo(u, t).seminorm_p;
    double oracle_val = oracle::seminorm_p(u, prm);
    CHECK(table_val == doctest::Approx(oracle_val).epsilon(1e-4));
  }
}

TEST_CASE("interpolated smooth profile also matches the oracle") {
  Mesh m = build_mesh(0.0, 1.0, 4, 1.0, 2);
  Params prm = make_params(2.0, 0.5, 1.0);
  QuadTable t = build_quad_table(m, prm);
  DiscreteFunction u = interpolate(m, [](double x) { return std::exp(-x * x); });
  double table_val = gagliardo(u, t).seminorm_p;
  double oracle_val = oracle::seminorm_p(u, prm);
  CHECK(table_val == doctest::Approx(oracle_val).epsilon(1e-4));
}

TEST_CASE("seminorm of a fixed smooth function is Cauchy under mesh refinement") {
  Params prm = make_params(2.0, 0.5, 1.0);
  auto f = [](double x) { return std::exp(-x * x); };
  double vals[3];
  int n = 4;
  for (int k = 0; k < 3; ++k, n *= 2) {
    Mesh m = build_mesh(0.0, 1.0, n, 1.0, n);
    QuadTable t = build_quad_table(m, prm);
    vals[k] = gagliardo(interpolate(m, f), t).seminorm_p;
  }
  double d1 = std::abs(vals[1] - vals[0]) / vals[1];
  double d2 = std::abs(vals[2] - vals[1]) / vals[2];
  CHECK(d2 < d1);
}

TEST_CASE("tail report flags insufficient collars only for tiny ps") {
  Mesh m = build_mesh(0.0, 1.0, 4, 1.0, 2);
  Params healthy = make_params(2.0, 0.5, 1.0);
  CHECK_FALSE(build_quad_table(m, healthy).collar_flagged);

  Params tiny = make_params(1.1, 0.05, 1.0);  // ps = 0.055, tail ~ 1/ps per side
  CHECK(build_quad_table(m, tiny).collar_flagged);
}

TEST_CASE("tail report lists every interior node") {
  Mesh m = build_mesh(0.0, 1.0, 4, 1.0, 2);
  Params prm = make_params(2.0, 0.5, 1.0);
  QuadTable t = build_quad_table(m, prm);
  CHECK(t.tail_node_ids.size() == t.tail_values.size());
  CHECK(static_cast<int>(t.tail_node_ids.size()) ==
        static_cast<int>(m.interior_node_ids().size()));
  for (double v : t.tail_values) CHECK(v > 0.0);
}

TEST_CASE("dense p=2 matrix reproduces the table quadratic form") {
  Mesh m = build_mesh(0.0, 1.0, 4, 1.0, 2);
  Params prm = make_params(2.0, 0.5, 1.0);
  QuadTable t = build_quad_table(m, prm);
  Eigen::MatrixXd K = t.dense_matrix_p2();
  DiscreteFunction u = interpolate(m, [](double x) { return std::sin(2.0 * x); });
  Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(u.values.data(), u.values.size());
  double quad = v.dot(K * v);
  CHECK(quad == doctest::Approx(gagliardo(u, t).seminorm_p).epsilon(1e-12));

  Params p3 = make_params(3.0, 0.5, 1.0);
  QuadTable t3 = build_quad_table(m, p3);
  CHECK_THROWS_AS(t3.dense_matrix_p2(), domain_error);
}
