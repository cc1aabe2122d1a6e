#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <Eigen/Dense>
#include <cmath>
#include <cstddef>

#include "doctest.h"
#include "nln/errors.hpp"
#include "nln/evolution.hpp"
#include "nln/forms.hpp"
#include "nln/mesh.hpp"
#include "nln/quadrature.hpp"
#include "nln/solvers.hpp"
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

DiscreteFunction hat(const Mesh& m) {
  return interpolate(m, [&](double x) {
    const double mid = 0.5 * (m.a + m.b);
    return std::max(0.0, 1.0 - 2.0 * std::fabs(x - mid) / (m.b - m.a));
  });
}

}  // namespace

TEST_CASE("interior mean mass is the exact trapezoid over the interior") {
  Mesh m = build_mesh(0.0, 1.0, 8, 1.0, 4);
  DiscreteFunction one = interpolate(m, [](double) { return 1.0; });
  CHECK(interior_mean_mass(one) == doctest::Approx(1.0).epsilon(1e-15));

  DiscreteFunction h = hat(m);
  CHECK(interior_mean_mass(h) == doctest::Approx(0.5).epsilon(1e-15));

  DiscreteFunction odd = interpolate(m, [](double x) { return x - 0.5; });
  CHECK(interior_mean_mass(odd) == doctest::Approx(0.0).epsilon(1e-15));

  // exterior values never contribute
  DiscreteFunction spiked = one;
  for (int id : m.exterior_node_ids())
    spiked.values[static_cast<std::size_t>(id)] = 1e6;
  CHECK(interior_mean_mass(spiked) == interior_mean_mass(one));
}

TEST_CASE("constant initial data is a fixed point of the flow") {
  Mesh m = build_mesh(0.0, 1.0, 8, 1.0, 8);
  Params prm = make_params(1.5, 0.5, 1.0, 4);
  QuadTable t = build_quad_table(m, prm);
  DiscreteFunction u0 = interpolate(m, [](double) { return 0.75; });
  DescentConfig cfg;
  EvolutionTrace tr = heat_solve(u0, 0.01, 5, t, cfg);
  REQUIRE(tr.times.size() == 6);
  for (int k = 0; k <= 5; ++k) {
    CHECK(tr.mass[k] == doctest::Approx(0.75).epsilon(1e-14));
    CHECK(tr.energy[k] <= 1e-14);
    CHECK(tr.iterations[k] == 0);
  }
  for (std::size_t i = 0; i < u0.values.size(); ++i)
    CHECK(tr.final.values[i] == doctest::Approx(0.75).epsilon(1e-13));
}

TEST_CASE("hat initial data conserves mass and dissipates energy") {
  Mesh m = build_mesh(0.0, 1.0, 16, 1.0, 16);
  Params prm = make_params(2.0, 0.5, 1.0, 4);
  QuadTable t = build_quad_table(m, prm);
  DiscreteFunction u0 = hat(m);
  DescentConfig cfg;
  EvolutionTrace tr = heat_solve(u0, 0.01, 20, t, cfg);

  REQUIRE(tr.times.size() == 21);
  REQUIRE(tr.mass.size() == 21);
  REQUIRE(tr.energy.size() == 21);
  REQUIRE(tr.iterations.size() == 21);
  CHECK(tr.iterations[0] == 0);
  CHECK(tr.iterations[1] > 0);
  for (int k = 0; k <= 20; ++k) CHECK(tr.times[k] == doctest::Approx(k * 0.01).epsilon(1e-15));

  const double drift_bound = 10.0 * cfg.grad_tol * std::sqrt(m.b - m.a);
  for (double mk : tr.mass) CHECK(std::fabs(mk - 0.5) <= drift_bound);

  for (int k = 1; k <= 20; ++k)
    CHECK(tr.energy[k] <= tr.energy[k - 1] + 1e-12 * tr.energy[0]);
  CHECK(tr.energy[20] < 0.5 * tr.energy[0]);
}

TEST_CASE("energy decays for slow and fast growth exponents") {
  for (double p : {1.5, 3.0}) {
    CAPTURE(p);
    Mesh m = build_mesh(0.0, 1.0, 8, 1.0, 8);
    Params prm = make_params(p, 0.5, 1.0, 4);
    QuadTable t = build_quad_table(m, prm);
    DescentConfig cfg;
    EvolutionTrace tr = heat_solve(hat(m), 0.01, 5, t, cfg);
    for (int k = 1; k <= 5; ++k)
      CHECK(tr.energy[k] <= tr.energy[k - 1] + 1e-12 * tr.energy[0]);
    CHECK(tr.energy[5] < tr.energy[0]);
    const double drift_bound = 10.0 * cfg.grad_tol;
    for (double mk : tr.mass) CHECK(std::fabs(mk - 0.5) <= drift_bound);
  }
}

TEST_CASE("snapshot requests round to the nearest step and deduplicate") {
  Mesh m = build_mesh(0.0, 1.0, 8, 1.0, 8);
  Params prm = make_params(2.0, 0.5, 1.0, 4);
  QuadTable t = build_quad_table(m, prm);
  DiscreteFunction u0 = hat(m);
  DescentConfig cfg;
  EvolutionTrace tr =
      heat_solve(u0, 0.01, 20, t, cfg, {0.05, 0.0501, 0.154, -3.0, 99.0});

  REQUIRE(tr.snapshot_times.size() == 4);  // {0, 0.05, 0.15, 0.2}
  REQUIRE(tr.snapshots.size() == 4);
  CHECK(tr.snapshot_times[0] == 0.0);
  CHECK(tr.snapshot_times[1] == doctest::Approx(0.05).epsilon(1e-15));
  CHECK(tr.snapshot_times[2] == doctest::Approx(0.15).epsilon(1e-15));
  CHECK(tr.snapshot_times[3] == doctest::Approx(0.20).epsilon(1e-15));
  for (std::size_t i = 0; i < u0.values.size(); ++i)
    CHECK(tr.snapshots[0].values[i] == u0.values[i]);

  // the chain is deterministic, so a shorter run reproduces the snapshot
  EvolutionTrace tr5 = heat_solve(u0, 0.01, 5, t, cfg);
  for (std::size_t i = 0; i < u0.values.size(); ++i)
    CHECK(tr.snapshots[1].values[i] == tr5.final.values[i]);
}

TEST_CASE("invalid evolution parameters raise config errors") {
  Mesh m = build_mesh(0.0, 1.0, 4, 1.0, 2);
  Params prm = make_params(2.0, 0.5, 1.0, 2);
  QuadTable t = build_quad_table(m, prm);
  DiscreteFunction u0 = hat(m);
  DescentConfig cfg;
  CHECK_THROWS_AS(heat_solve(u0, 0.0, 5, t, cfg), config_error);
  CHECK_THROWS_AS(heat_solve(u0, -0.1, 5, t, cfg), config_error);
  CHECK_THROWS_AS(heat_solve(u0, 0.01, -1, t, cfg), config_error);
}

TEST_CASE("implicit steps match the dense linear chain at p=2") {
  Mesh m = build_mesh(0.0, 1.0, 8, 1.0, 8);
  Params prm = make_params(2.0, 0.5, 1.0, 4);
  QuadTable t = build_quad_table(m, prm);
  const int n = m.n_nodes();
  const double tau = 0.01;

  DiscreteFunction u0 = hat(m);
  DescentConfig cfg;
  cfg.grad_tol = 1e-10;
  EvolutionTrace tr =
      heat_solve(u0, tau, 5, t, cfg, {0.01, 0.02, 0.03, 0.04, 0.05});
  REQUIRE(tr.snapshots.size() == 5);

  // (M + tau K) v_{k+1} = M v_k with M the interior P1 mass matrix padded by
  // zero exterior rows; the padded system is positive definite because K's
  // kernel (constants) has positive interior mass.
  Eigen::MatrixXd K = t.dense_matrix_p2();
  auto mm = oracle::interior_mass_matrix(m);
  Eigen::MatrixXd M(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      M(i, j) = mm[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  Eigen::MatrixXd A = M + tau * K;
  Eigen::LLT<Eigen::MatrixXd> llt(A);

  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = u0.values[static_cast<std::size_t>(i)];
  for (int k = 0; k < 5; ++k) {
    v = llt.solve(M * v);
    for (int i = 0; i < n; ++i)
      CHECK(std::fabs(tr.snapshots[static_cast<std::size_t>(k)]
                          .values[static_cast<std::size_t>(i)] -
                      v(i)) <= 1e-8);
  }
}

TEST_CASE("long runs flatten toward the conserved mean") {
  Mesh m = build_mesh(0.0, 1.0, 8, 1.0, 8);
  Params prm = make_params(2.0, 0.5, 1.0, 4);
  QuadTable t = build_quad_table(m, prm);
  DescentConfig cfg;
  EvolutionTrace tr = heat_solve(hat(m), 0.05, 40, t, cfg);
  for (int id : m.interior_node_ids())
    CHECK(std::fabs(tr.final.values[static_cast<std::size_t>(id)] - 0.5) <= 1e-3);
  for (int id : m.exterior_node_ids())
    CHECK(std::fabs(tr.final.values[static_cast<std::size_t>(id)] - 0.5) <= 1e-3);
}
