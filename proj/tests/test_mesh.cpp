#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "nln/errors.hpp"
#include "nln/mesh.hpp"

using namespace nln;

TEST_CASE("small mesh lays out interior plus one collar element per side") {
  Mesh m = build_mesh(0.0, 1.0, 2, 0.5, 1);
  REQUIRE(m.n_nodes() == 5);
  REQUIRE(m.n_elements() == 4);
  const double expect[5] = {-0.5, 0.0, 0.5, 1.0, 1.5};
  for (int i = 0; i < 5; ++i) CHECK(m.nodes[i] == doctest::Approx(expect[i]).epsilon(1e-15));
  CHECK(m.left_edge() == doctest::Approx(-0.5));
  CHECK(m.right_edge() == doctest::Approx(1.5));
  CHECK(m.h_interior() == doctest::Approx(0.5));
  CHECK(m.h_exterior() == doctest::Approx(0.5));
}

TEST_CASE("node count follows n_interior + 2 n_exterior + 1") {
  Mesh m = build_mesh(0.0, 1.0, 4, 1.0, 2);
  CHECK(m.n_nodes() == 4 + 2 * 2 + 1);
  CHECK(m.n_elements() == 4 + 2 * 2);
  // elements sorted, never straddling a or b
  for (const auto& el : m.elements) {
    double x0 = m.nodes[el.n0], x1 = m.nodes[el.n1];
    CHECK(x0 < x1);
    CHECK_FALSE((x0 < 0.0 && x1 > 0.0));
    CHECK_FALSE((x0 < 1.0 && x1 > 1.0));
  }
}

TEST_CASE("region tags partition the nodes at a and b inclusive") {
  Mesh m = build_mesh(0.0, 1.0, 4, 1.0, 2);
  int n_int = 0, n_ext = 0;
  for (int i = 0; i < m.n_nodes(); ++i) {
    if (m.node_region(i) == Region::Interior) {
      ++n_int;
      CHECK(m.nodes[i] >= 0.0);
      CHECK(m.nodes[i] <= 1.0);
    } else {
      ++n_ext;
      CHECK((m.nodes[i] < 0.0 || m.nodes[i] > 1.0));
    }
  }
  CHECK(n_int == 5);
  CHECK(n_ext == 4);
  CHECK(static_cast<int>(m.interior_node_ids().size()) == 5);
  CHECK(static_cast<int>(m.exterior_node_ids().size()) == 4);
}

TEST_CASE("doubling n_interior nests the coarse nodes") {
  Mesh coarse = build_mesh(0.0, 1.0, 4, 1.0, 2);
  Mesh fine = build_mesh(0.0, 1.0, 8, 1.0, 4);
  for (double x : coarse.nodes) {
    bool found = false;
    for (double y : fine.nodes)
      if (std::abs(x - y) < 1e-14) found = true;
    CHECK(found);
  }
}

TEST_CASE("mesh construction rejects bad arguments") {
  CHECK_THROWS_AS(build_mesh(1.0, 0.0, 4, 1.0, 2), config_error);
  CHECK_THROWS_AS(build_mesh(0.0, 1.0, 1, 1.0, 2), config_error);
  CHECK_THROWS_AS(build_mesh(0.0, 1.0, 4, 0.0, 2), config_error);
  CHECK_THROWS_AS(build_mesh(0.0, 1.0, 4, 1.0, 0), config_error);
}

TEST_CASE("locate and local_coord agree with the node layout") {
  Mesh m = build_mesh(0.0, 1.0, 2, 0.5, 1);
  int e = m.locate(0.25);
  CHECK(m.nodes[m.elements[e].n0] <= 0.25);
  CHECK(m.nodes[m.elements[e].n1] >= 0.25);
  CHECK(m.local_coord(e, 0.25) == doctest::Approx(0.5));
  // ties at shared nodes resolve to the element starting there
  int el = m.locate(0.5);
  CHECK(m.nodes[m.elements[el].n0] == doctest::Approx(0.5));
  // the final node still maps to a real element
  int er = m.locate(m.right_edge());
  CHECK(er == m.n_elements() - 1);
  CHECK_THROWS_AS(m.locate(2.0), domain_error);
  CHECK_THROWS_AS(m.locate(-2.0), domain_error);
}

TEST_CASE("node weights sum to the meshed length") {
  Mesh m = build_mesh(0.0, 1.0, 4, 1.0, 2);
  auto w = m.node_weights();
  double sum = 0.0;
  for (double v : w) {
    CHECK(v > 0.0);
    sum += v;
  }
  CHECK(sum == doctest::Approx(3.0).epsilon(1e-12));  // |[-1, 2]|
}

TEST_CASE("element gaps vanish for touching pairs and grow with separation") {
  Mesh m = build_mesh(0.0, 1.0, 4, 1.0, 2);
  CHECK(m.element_gap(2, 2) == doctest::Approx(0.0));
  CHECK(m.element_gap(2, 3) == doctest::Approx(0.0));  // shared node
  CHECK(m.element_gap(2, 4) > 0.0);
  CHECK(m.element_gap(2, 5) > m.element_gap(2, 4));
  CHECK(m.element_gap(2, 5) == doctest::Approx(m.element_gap(5, 2)));
}

TEST_CASE("interpolation samples nodal values") {
  Mesh m = build_mesh(0.0, 1.0, 2, 0.5, 1);
  DiscreteFunction one = interpolate(m, [](double) { return 1.0; });
  for (double v : one.values) CHECK(v == doctest::Approx(1.0));

  DiscreteFunction lin = interpolate(m, [](double x) { return x; });
  for (int i = 0; i < m.n_nodes(); ++i)
    CHECK(lin.values[i] == doctest::Approx(m.nodes[i]));
}

TEST_CASE("interpolation rejects non-finite samples") {
  Mesh m = build_mesh(-1.0, 1.0, 2, 1.0, 1);  // node at 0
  CHECK_THROWS_AS(interpolate(m, [](double x) { return 1.0 / x; }), domain_error);
}

TEST_CASE("piecewise-linear evaluation with implicit zero beyond the collar") {
  Mesh m = build_mesh(0.0, 1.0, 2, 0.5, 1);
  DiscreteFunction u = interpolate(m, [](double x) { return x; });
  CHECK(u(0.25) == doctest::Approx(0.25));
  CHECK(u(0.75) == doctest::Approx(0.75));
  CHECK(u(1.5) == doctest::Approx(1.5));
  CHECK(u(10.0) == doctest::Approx(0.0));
  CHECK(u(-10.0) == doctest::Approx(0.0));
}

TEST_CASE("interior and exterior extrema track the region split") {
  Mesh m = build_mesh(0.0, 1.0, 2, 0.5, 1);
  DiscreteFunction u(m);
  u.values = {5.0, -1.0, 0.5, 2.0, -3.0};  // nodes -0.5, 0, 0.5, 1, 1.5
  CHECK(u.min_interior() == doctest::Approx(-1.0));
  CHECK(u.max_interior() == doctest::Approx(2.0));
  CHECK(u.min_exterior() == doctest::Approx(-3.0));
  CHECK(u.max_exterior() == doctest::Approx(5.0));
}
