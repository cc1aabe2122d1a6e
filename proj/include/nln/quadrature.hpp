#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <vector>

#include "nln/mesh.hpp"
#include "nln/params.hpp"

namespace nln {

// Interaction kernel |x-y|^{-(1+ps)} in one dimension (normalizing constant
// fixed to 1). Throws domain_error on the diagonal.
double kernel(double x, double y, const Params& params);

// Analytic bound on the kernel mass neglected beyond the collar, seen from x:
// int_d^inf t^{-(1+ps)} dt = d^{-ps}/(ps) per side, summed over both collar
// ends. pre: x strictly inside (a-R, b+R).
double tail_weight(double x, const Mesh& mesh, const Params& params);

// One quadrature point of a pair rule. x lies in element a, y in element b;
// tx, ty are the local coordinates inside those elements, k = kernel(x,y).
struct QuadPoint {
  double x, y, w, k;
  double tx, ty;
};

// Rule for one unordered element pair (ea <= eb). Weights of ea < eb pairs
// are doubled so the table covers both orientations of the symmetric
// integrands it is built for; ea == eb rules cover both diagonal triangles
// explicitly.
struct PairRule {
  int ea, eb;
  int n0a, n1a, n0b, n1b;
  std::vector<QuadPoint> pts;
};

// Tensorized rule over all element pairs (E,F) with at least one of E,F
// interior (exterior x exterior pairs excluded: the form never sees them).
// Valid for integrands G(u(x)-u(y)) * |x-y|^{-(1+ps)} with G(t) = |t|^p or
// G(t) = J_p(t)*(v(x)-v(y)) and u, v piecewise linear on the mesh:
// identical and node-sharing pairs use a diagonal/corner transform with a
// Gauss-Jacobi radial rule that integrates the |x-y|^{p-1-ps} behaviour
// exactly; separated pairs use tensor Gauss with distance-graded order.
struct QuadTable {
  const Mesh* mesh = nullptr;
  Params params;
  std::vector<PairRule> pairs;

  // Truncation report: tail_weight at each interior node, and a heuristic
  // flag raised when the neglected mass exceeds unit scale anywhere.
  std::vector<int> tail_node_ids;
  std::vector<double> tail_values;
  bool collar_flagged = false;

  std::size_t total_points() const;

  // Dense symmetric matrix K with u^T K u = [u]^p for p == 2 (the quadratic
  // case); oracle backend for eigen/heat checks. Throws domain_error for
  // p != 2.
  Eigen::MatrixXd dense_matrix_p2() const;
};

QuadTable build_quad_table(const Mesh& mesh, const Params& params);

}  // namespace nln
