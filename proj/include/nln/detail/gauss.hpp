#pragma once

#include <vector>

namespace nln::detail {

struct Rule1D {
  std::vector<double> x;  // nodes
  std::vector<double> w;  // weights
  int size() const { return static_cast<int>(x.size()); }
};

// n-point Gauss-Legendre rule on (0,1).
Rule1D gauss_legendre(int n);

// n-point Gauss-Jacobi rule on (0,1) for the weight z^gamma, gamma > -1:
//   int_0^1 f(z) z^gamma dz = sum_i w_i f(x_i)   (exact for poly f, deg<=2n-1)
Rule1D gauss_jacobi(int n, double gamma);

// Same nodes with weights divided by x_i^gamma, so the rule applies directly
// to integrands that carry the z^gamma singularity themselves.
Rule1D gauss_jacobi_absorbed(int n, double gamma);

// Affine image of a (0,1) rule on (a,b).
Rule1D scaled(const Rule1D& r, double a, double b);

// Memoized gauss_legendre (hot path for per-element integration loops).
const Rule1D& cached_legendre(int n);

}  // namespace nln::detail
