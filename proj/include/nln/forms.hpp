#pragma once

#include <functional>
#include <vector>

#include "nln/mesh.hpp"
#include "nln/params.hpp"
#include "nln/quadrature.hpp"

namespace nln {

// Odd power nonlinearity J_p(t) = |t|^{p-2} t, continuously extended by
// J_p(0) = 0 (matters for p < 2).
double j_p(double t, double p);

// Worker count for table evaluation. Reductions run over fixed pair blocks,
// so results are bit-reproducible for a given count.
void set_eval_threads(int n);
int eval_threads();

struct FormValue {
  double seminorm_p = 0.0;  // [u]^p over R^2 minus (exterior x exterior)
  double phi = 0.0;         // [u]^p / 2
  double mass_p = 0.0;      // int_Omega |u|^p
  double norm_p = 0.0;      // phi + mass_p (the equivalent-norm p-th power)
};

// Dual vector: components are pairings with the nodal hat basis.
struct DualVector {
  const Mesh* mesh = nullptr;
  std::vector<double> v;

  DualVector() = default;
  explicit DualVector(const Mesh& m) : mesh(&m), v(m.nodes.size(), 0.0) {}

  // Euclidean norm of the components scaled by the diagonal mesh weights
  // (discrete L^2-dual norm): sqrt(sum_i v_i^2 / h_i).
  double dual_norm() const;

  double dot(const std::vector<double>& nodal) const;
};

// Evaluates the truncated Gagliardo energy and the interior p-mass of u.
FormValue gagliardo(const DiscreteFunction& u, const QuadTable& table);

// Weak-form pairing vector: component i is
//   (1/2) iint J_p(u(x)-u(y)) (phi_i(x)-phi_i(y)) |x-y|^{-(1+ps)}.
// The first variation of phi(u) in direction v is p * <form_gradient(u), v>.
DualVector form_gradient(const DiscreteFunction& u, const QuadTable& table);

// Component i is int_Omega J_p(u) phi_i dx. The first variation of mass_p is
// p * <mass_gradient(u), v>.
DualVector mass_gradient(const DiscreteFunction& u, const Params& params);

// int_Omega g(x, u(x)) dx by per-element Gauss, split at interior sign
// changes of u so |.|^p-type kinks never cross a panel.
double integrate_interior(const DiscreteFunction& u, int quad_order,
                          const std::function<double(double, double)>& g);

// Component i is int_Omega g(x, u(x)) phi_i(x) dx, with the same splitting.
DualVector weighted_interior(const DiscreteFunction& u, int quad_order,
                             const std::function<double(double, double)>& g);

// int_Omega f(x) phi_i(x) dx for a scalar source.
DualVector source_vector(const Mesh& mesh, int quad_order,
                         const std::function<double(double)>& f);

// Consistent P1 mass action over interior elements: out_i = int_Omega z phi_i
// for the piecewise-linear z with the given nodal values (exterior nodes see
// only their interior-element neighbours, i.e. nothing).
DualVector interior_mass_apply(const Mesh& mesh, const std::vector<double>& z);

// int_Omega z^2 dx for piecewise-linear nodal z (exact).
double interior_l2_sq(const Mesh& mesh, const std::vector<double>& z);

// |x+h|^p - |x|^p with relative accuracy in the difference itself (expm1 /
// log1p on the same-sign branch). Lets line searches certify decreases far
// below the ulp of the undifferenced energies.
double power_diff(double x, double h, double p);

// [u + alpha dir]^p - [u]^p over the table: per-point power_diff terms, so
// the result carries the accuracy of the difference, not of the energies.
double gagliardo_delta(const DiscreteFunction& u, const std::vector<double>& dir,
                       double alpha, const QuadTable& table);

// int_Omega (|u + alpha dir|^p - |u|^p), on panels split at the sign changes
// of both u and u + alpha dir.
double interior_power_delta(const DiscreteFunction& u,
                            const std::vector<double>& dir, double alpha,
                            double p, int quad_order);

// int_Omega ((z + alpha dir)^2 - z^2) = 2 alpha int z dir + alpha^2 int dir^2,
// assembled exactly element by element.
double interior_l2_delta(const Mesh& mesh, const std::vector<double>& z,
                         const std::vector<double>& dir, double alpha);

}  // namespace nln
