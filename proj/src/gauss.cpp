#include "nln/detail/gauss.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace nln::detail {

namespace {

// Golub-Welsch: nodes/weights on [-1,1] from the three-term recurrence
// coefficients (diag d, squared off-diag b with b[0] = mu0).
Rule1D golub_welsch(const std::vector<double>& d, const std::vector<double>& b) {
  const int n = static_cast<int>(d.size());
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) J(i, i) = d[i];
  for (int i = 1; i < n; ++i) {
    double off = std::sqrt(b[i]);
    J(i, i - 1) = off;
    J(i - 1, i) = off;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  Rule1D r;
  r.x.resize(n);
  r.w.resize(n);
  for (int i = 0; i < n; ++i) {
    r.x[i] = es.eigenvalues()(i);
    double v0 = es.eigenvectors()(0, i);
    r.w[i] = b[0] * v0 * v0;
  }
  return r;
}

// Recurrence for Jacobi weight (1-x)^alpha (1+x)^beta on [-1,1] (Gautschi).
void r_jacobi(int n, double alpha, double beta, std::vector<double>& d,
              std::vector<double>& b) {
  d.resize(n);
  b.resize(n);
  double ab = alpha + beta;
  d[0] = (beta - alpha) / (ab + 2.0);
  b[0] = std::exp((ab + 1.0) * std::log(2.0) + std::lgamma(alpha + 1.0) +
                  std::lgamma(beta + 1.0) - std::lgamma(ab + 2.0));
  if (n > 1) {
    d[1] = (beta * beta - alpha * alpha) / ((2.0 + ab) * (4.0 + ab));
    b[1] = 4.0 * (alpha + 1.0) * (beta + 1.0) /
           ((ab + 2.0) * (ab + 2.0) * (ab + 3.0));
  }
  for (int k = 2; k < n; ++k) {
    double kk = k;
    double den = 2.0 * kk + ab;
    d[k] = (beta * beta - alpha * alpha) / (den * (den + 2.0));
    b[k] = 4.0 * kk * (kk + alpha) * (kk + beta) * (kk + ab) /
           (den * den * (den + 1.0) * (den - 1.0));
  }
}

}  // namespace

Rule1D gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n must be >= 1");
  std::vector<double> d(n, 0.0), b(n);
  b[0] = 2.0;
  for (int k = 1; k < n; ++k) {
    double kk = k;
    b[k] = kk * kk / (4.0 * kk * kk - 1.0);
  }
  Rule1D r = golub_welsch(d, b);
  for (int i = 0; i < n; ++i) {
    r.x[i] = 0.5 * (r.x[i] + 1.0);
    r.w[i] *= 0.5;
  }
  return r;
}

Rule1D gauss_jacobi(int n, double gamma) {
  if (n < 1) throw std::invalid_argument("gauss_jacobi: n must be >= 1");
  if (!(gamma > -1.0)) throw std::invalid_argument("gauss_jacobi: gamma must be > -1");
  // weight z^gamma on (0,1) maps to (1+x)^gamma on [-1,1]: alpha=0, beta=gamma
  std::vector<double> d, b;
  r_jacobi(n, 0.0, gamma, d, b);
  Rule1D r = golub_welsch(d, b);
  double scale = std::pow(2.0, -gamma - 1.0);
  for (int i = 0; i < n; ++i) {
    r.x[i] = 0.5 * (r.x[i] + 1.0);
    r.w[i] *= scale;
  }
  return r;
}

Rule1D gauss_jacobi_absorbed(int n, double gamma) {
  Rule1D r = gauss_jacobi(n, gamma);
  for (int i = 0; i < n; ++i) r.w[i] *= std::pow(r.x[i], -gamma);
  return r;
}

Rule1D scaled(const Rule1D& r, double a, double b) {
  Rule1D out = r;
  double len = b - a;
  for (int i = 0; i < r.size(); ++i) {
    out.x[i] = a + len * r.x[i];
    out.w[i] = len * r.w[i];
  }
  return out;
}

const Rule1D& cached_legendre(int n) {
  thread_local std::vector<Rule1D> cache;
  if (n >= static_cast<int>(cache.size())) cache.resize(n + 1);
  if (cache[n].size() == 0) cache[n] = gauss_legendre(n);
  return cache[n];
}

}  // namespace nln::detail
