#pragma once

#include <functional>
#include <string>
#include <vector>

#include "nln/forms.hpp"
#include "nln/mesh.hpp"
#include "nln/quadrature.hpp"
#include "nln/solvers.hpp"

namespace nln {

// Superlinear reaction term f(x,t) with primitive F (F(x,0) = 0) and the
// bounds used by the growth checks: |f(x,t)| <= a(x) + c |t|^{r-1};
// sigma(x,t) = f t - p F quasi-monotone with constants theta, beta_star.
// model == true marks the pure power f(x,t) = |t|^{r-2} t, for which the
// Nehari scaling below is exact.
struct NonlinearitySpec {
  std::function<double(double, double)> f;
  std::function<double(double, double)> F;
  std::function<double(double)> a = [](double) { return 0.0; };
  double c = 1.0;
  double r = 3.0;
  double theta = 1.0;
  std::function<double(double)> beta_star = [](double) { return 0.0; };
  bool model = false;
};

// The pure power nonlinearity |t|^{r-2} t with primitive |t|^r / r.
NonlinearitySpec model_nonlinearity(double r);

enum class SignClass { Positive, Negative, Mixed, Constant };
enum class SolveSign { Plus, Minus };

struct SolveReport {
  DiscreteFunction u;
  double grad_residual = 0.0;
  double objective = 0.0;
  bool certified = false;
  SignClass sign = SignClass::Constant;
  double min_interior = 0.0, max_interior = 0.0;
  double min_exterior = 0.0, max_exterior = 0.0;
  double nehari_scale = 1.0;  // last projection scaling (model searches)
  SolveStats stats;
};

// Nodal sign classification at tolerance 1e-8 over all nodes: Constant when
// the value spread is below tol, otherwise Positive / Negative when the
// offending side stays within tol of zero, else Mixed.
SignClass classify_sign(const DiscreteFunction& u);

// Minimizes the strictly convex coercive functional
//   (1/p) (phi(u) + int |u|^p) - int f u
// whose critical equation is the source problem with zero-order term and
// homogeneous Neumann data. The minimizer is unique; u0 only sets the start.
SolveReport solve_poisson(const std::function<double(double)>& f,
                          const QuadTable& table, const DiscreteFunction& u0,
                          const DescentConfig& cfg);

enum class Compatibility {
  Compatible,           // int_Omega f = 0: solvable modulo additive constants
  CompatibleConstants,  // f == 0: solutions are exactly the constants
  Incompatible          // int_Omega f != 0: testing against v == 1 forbids it
};

// Solvability screen for the pure Neumann problem (no zero-order term,
// homogeneous exterior data).
Compatibility check_compatibility(const std::function<double(double)>& f,
                                  const Mesh& mesh, const Params& params);

struct HypothesisReport {
  bool f1 = false;  // |f| <= a(x) + c |t|^{r-1} on the grid
  bool f2 = false;  // F/|t|^p nondecreasing in |t| past 1 and >= 10 at |t|=T
  bool f3 = false;  // sigma(x,t1) <= theta sigma(x,t2) + beta*(x), |t1|<=|t2|
  bool f4 = false;  // |f(x,t)/J_p(t)| small at the smallest grid |t|
  double f1_worst = 0.0;      // max of |f| - bound
  double f2_tail_min = 0.0;   // min of F/|t|^p at |t| = T
  double f2_monotone_defect = 0.0;
  double f3_worst = 0.0;      // max of sigma(t1) - theta sigma(t2) - beta*
  double f4_ratio = 0.0;      // max over x of |f/J_p| at smallest |t|
  bool all() const { return f1 && f2 && f3 && f4; }
};

// Samples the growth hypotheses on positions x values. The value grid should
// reach a large cutoff T (its extreme magnitudes are taken as T) and contain
// small nonzero values for the vanishing-slope check.
HypothesisReport check_growth_hypotheses(const NonlinearitySpec& spec,
                                         const Params& params,
                                         const std::vector<double>& positions,
                                         const std::vector<double>& values);

// Scales u onto the Nehari set of the one-sided model functional:
//   t* = ((phi(u) + int |u|^p) / int (u^+)^r)^{1/(r-p)}.
// pre: spec.model and int (u^+)^r > 0 (domain_error otherwise).
DiscreteFunction nehari_project(const DiscreteFunction& u,
                                const NonlinearitySpec& spec,
                                const QuadTable& table);

// Finds a nontrivial critical point of E_+-(u) = (1/p)(phi + int |u|^p)
// - int F(x, u^+-). Plus searches use F(x, u^+): model specs run Nehari
// projection + constrained descent; general specs run a path-deformation
// search (max point of a 0-to-large-energy path descends onto the pass)
// followed by residual-norm minimization to certify. Minus runs solve the
// reflected problem f~(x,t) = -f(x,-t) and negate. Seeds are tried in order;
// the certified result with the lowest positive objective wins, otherwise the
// lowest-residual attempt is returned uncertified.
SolveReport mountain_pass_solve(SolveSign sign, const NonlinearitySpec& spec,
                                const QuadTable& table,
                                const std::vector<DiscreteFunction>& seeds,
                                const DescentConfig& cfg,
                                double certify_tol = 1e-6);

}  // namespace nln
