#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "doctest.h"
#include "nln/errors.hpp"
#include "nln/forms.hpp"
#include "nln/mesh.hpp"
#include "nln/quadrature.hpp"
#include "nln/solvers.hpp"
#include "oracles.hpp"

using namespace nln;

namespace {

Params make_params(double p, double s, double collar, int q = 4) {
  Params prm;
  prm.p = p;
  prm.s = s;
  prm.collar = collar;
  prm.quad_order = q;
  return prm;
}

DiscreteFunction random_function(const Mesh& m, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  DiscreteFunction u(m);
  for (auto& v : u.values) v = dist(rng);
  return u;
}

// Certified decreases can be smaller than one ulp of the running objective,
// so consecutive trace entries may tie; the trace must never go up and the
// run as a whole must make progress.
void check_descent(const SolveStats& stats) {
  for (std::size_t k = 0; k + 1 < stats.objective_trace.size(); ++k)
    CHECK(stats.objective_trace[k + 1] <= stats.objective_trace[k]);
  if (stats.objective_trace.size() > 1)
    CHECK(stats.objective_trace.back() < stats.objective_trace.front());
}

}  // namespace

TEST_CASE("monotone root finding") {
  auto lin = [](double t) { return t - 0.3; };
  CHECK(root_find_monotone(lin, 0.0, 1.0, 1e-14) == doctest::Approx(0.3).epsilon(1e-12));

  auto paired = [](double t) { return j_p(t - 1.0, 3.0) + j_p(t + 1.0, 3.0); };
  CHECK(root_find_monotone(paired, -1.0, 1.0, 1e-14) ==
        doctest::Approx(0.0).epsilon(1e-12));

  auto cubic = [](double t) { return t * t * t - 2.0; };
  CHECK(root_find_monotone(cubic, 0.0, 2.0, 1e-14) ==
        doctest::Approx(std::cbrt(2.0)).epsilon(1e-12));

  CHECK_THROWS_AS(root_find_monotone(lin, 0.5, 1.0, 1e-14), domain_error);
  CHECK_THROWS_AS(root_find_monotone(lin, -1.0, 0.1, 1e-14), domain_error);
}

TEST_CASE("descent solves a quadratic model problem") {
  Mesh m = build_mesh(0.0, 1.0, 4, 1.0, 2);
  std::mt19937_64 rng(13);
  DiscreteFunction target = random_function(m, rng);
  auto w = m.node_weights();

  ObjectiveFn value = [&](const DiscreteFunction& u) {
    double s = 0.0;
    for (int i = 0; i < m.n_nodes(); ++i) {
      double d = u.values[i] - target.values[i];
      s += w[i] * d * d;
    }
    return s;
  };
  GradientFn gradient = [&](const DiscreteFunction& u) {
    DualVector g(m);
    for (int i = 0; i < m.n_nodes(); ++i)
      g.v[i] = 2.0 * w[i] * (u.values[i] - target.values[i]);
    return g;
  };

  DescentConfig cfg;
  cfg.grad_tol = 1e-10;
  auto [u, stats] = descend(value, gradient, DiscreteFunction(m), cfg);
  CHECK(stats.converged);
  check_descent(stats);
  for (int i = 0; i < m.n_nodes(); ++i)
    CHECK(u.values[i] == doctest::Approx(target.values[i]).epsilon(1e-7));
}

TEST_CASE("delta-based line search reaches the same minimizer") {
  Mesh m = build_mesh(0.0, 1.0, 4, 1.0, 2);
  std::mt19937_64 rng(29);
  DiscreteFunction target = random_function(m, rng);
  auto w = m.node_weights();

  ObjectiveFn value = [&](const DiscreteFunction& u) {
    double s = 0.0;
    for (int i = 0; i < m.n_nodes(); ++i) {
      double d = u.values[i] - target.values[i];
      s += w[i] * d * d;
    }
    return s;
  };
  GradientFn gradient = [&](const DiscreteFunction& u) {
    DualVector g(m);
    for (int i = 0; i < m.n_nodes(); ++i)
      g.v[i] = 2.0 * w[i] * (u.values[i] - target.values[i]);
    return g;
  };
  DeltaFn delta = [&](const DiscreteFunction& u, const std::vector<double>& dir,
                      double alpha) {
    double s = 0.0;
    for (int i = 0; i < m.n_nodes(); ++i) {
      double d = u.values[i] - target.values[i];
      double step = alpha * dir[i];
      s += w[i] * step * (2.0 * d + step);
    }
    return s;
  };

  DescentConfig cfg;
  cfg.grad_tol = 1e-12;  // deeper than plain objective comparison can certify
  auto [u, stats] = descend(value, gradient, delta, DiscreteFunction(m), cfg);
  CHECK(stats.converged);
  CHECK(stats.grad_norm <= 1e-12);
  check_descent(stats);
  for (int i = 0; i < m.n_nodes(); ++i)
    CHECK(u.values[i] == doctest::Approx(target.values[i]).epsilon(1e-9));
}

TEST_CASE("line-search failure away from the optimum raises solver_error") {
  Mesh m = build_mesh(0.0, 1.0, 2, 0.5, 1);
  // constant objective with a lying nonzero gradient: no decrease exists
  ObjectiveFn value = [](const DiscreteFunction&) { return 1.0; };
  GradientFn gradient = [&](const DiscreteFunction&) {
    DualVector g(m);
    for (auto& v : g.v) v = 1.0;
    return g;
  };
  DescentConfig cfg;
  cfg.max_backtracks = 8;
  try {
    descend(value, gradient, DiscreteFunction(m), cfg);
    FAIL("expected solver_error");
  } catch (const solver_error& e) {
    CHECK(e.last_residual > 0.0);
    CHECK(e.iterations >= 0);
  }
}

TEST_CASE("proximal step leaves constants alone") {
  Mesh m = build_mesh(0.0, 1.0, 4, 1.0, 2);
  Params prm = make_params(1.5, 0.5, 1.0);
  QuadTable t = build_quad_table(m, prm);
  DiscreteFunction c = interpolate(m, [](double) { return 0.8; });
  DescentConfig cfg;
  auto [v, stats] = prox_step(c, 0.05, t, cfg);
  CHECK(stats.converged);
  CHECK(stats.iterations == 0);
  for (int i = 0; i < m.n_nodes(); ++i)
    CHECK(v.values[i] == doctest::Approx(0.8).epsilon(1e-12));
}

TEST_CASE("proximal step matches the dense linear system at p=2") {
  Mesh m = build_mesh(0.0, 1.0, 8, 1.0, 4);
  Params prm = make_params(2.0, 0.5, 1.0);
  QuadTable t = build_quad_table(m, prm);
  const double tau = 0.01;
  DiscreteFunction u0 = interpolate(m, [](double x) {
    if (x < 0.0 || x > 1.0) return 0.0;
    return x < 0.5 ? 2.0 * x : 2.0 - 2.0 * x;
  });

  DescentConfig cfg;
  cfg.grad_tol = 1e-11;
  auto [v, stats] = prox_step(u0, tau, t, cfg);
  CHECK(stats.converged);
  check_descent(stats);

  // (M + tau K) v = M u0 with K the dense table matrix, M interior mass
  int n = m.n_nodes();
  Eigen::MatrixXd K = t.dense_matrix_p2();
  auto Mo = oracle::interior_mass_matrix(m);
  Eigen::MatrixXd A(n, n);
  Eigen::VectorXd rhs(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) A(i, j) = Mo[i][j] + tau * K(i, j);
    double s = 0.0;
    for (int j = 0; j < n; ++j) s += Mo[i][j] * u0.values[j];
    rhs(i) = s;
  }
  Eigen::VectorXd dense = A.ldlt().solve(rhs);
  for (int i = 0; i < n; ++i)
    CHECK(v.values[i] == doctest::Approx(dense(i)).epsilon(1e-8));
}

TEST_CASE("proximal step is nonexpansive in L2 at p=2") {
  Mesh m = build_mesh(0.0, 1.0, 4, 1.0, 2);
  Params prm = make_params(2.0, 0.5, 1.0);
  QuadTable t = build_quad_table(m, prm);
  DescentConfig cfg;
  cfg.grad_tol = 1e-11;
  std::mt19937_64 rng(31);
  for (int rep = 0; rep < 3; ++rep) {
    DiscreteFunction a = random_function(m, rng);
    DiscreteFunction b = random_function(m, rng);
    auto [pa, sa] = prox_step(a, 0.05, t, cfg);
    auto [pb, sb] = prox_step(b, 0.05, t, cfg);
    std::vector<double> dab(m.n_nodes()), dpab(m.n_nodes());
    for (int i = 0; i < m.n_nodes(); ++i) {
      dab[i] = a.values[i] - b.values[i];
      dpab[i] = pa.values[i] - pb.values[i];
    }
    double before = std::sqrt(interior_l2_sq(m, dab));
    double after = std::sqrt(interior_l2_sq(m, dpab));
    CHECK(after <= before + 1e-8);
  }
}

TEST_CASE("proximal step rejects nonpositive time steps") {
  Mesh m = build_mesh(0.0, 1.0, 2, 0.5, 1);
  Params prm = make_params(2.0, 0.5, 0.5);
  QuadTable t = build_quad_table(m, prm);
  DiscreteFunction u(m);
  DescentConfig cfg;
  CHECK_THROWS_AS(prox_step(u, 0.0, t, cfg), domain_error);
  CHECK_THROWS_AS(prox_step(u, -1.0, t, cfg), domain_error);
}

TEST_CASE("energy part of the proximal objective never increases") {
  Mesh m = build_mesh(0.0, 1.0, 4, 1.0, 2);
  for (double p : {1.5, 2.0, 3.0}) {
    CAPTURE(p);
    Params prm = make_params(p, 0.5, 1.0);
    QuadTable t = build_quad_table(m, prm);
    std::mt19937_64 rng(17);
    DiscreteFunction u = random_function(m, rng);
    double before = gagliardo(u, t).seminorm_p;
    DescentConfig cfg;
    auto [v, stats] = prox_step(u, 0.02, t, cfg);
    check_descent(stats);
    double after = gagliardo(v, t).seminorm_p;
    CHECK(after <= before * (1.0 + 1e-12));
  }
}
