#pragma once

#include <functional>
#include <vector>

#include "nln/errors.hpp"

namespace nln {

enum class Region { Interior, Exterior };

// 1D mesh on [a - R, b + R]: uniform partition of the interval Omega = (a,b)
// plus uniform partitions of the two collar pieces [a-R,a] and [b,b+R].
// Nodes are sorted ascending; elements are sorted by position and never
// straddle a or b. Nodes at a and b count as interior.
struct Mesh {
  double a = 0.0, b = 1.0;
  double collar = 1.0;
  int n_interior = 0;   // interior elements
  int n_exterior = 0;   // exterior elements per side

  std::vector<double> nodes;
  struct Element {
    int n0, n1;         // node indices, nodes[n0] < nodes[n1]
    Region region;
  };
  std::vector<Element> elements;

  int n_nodes() const { return static_cast<int>(nodes.size()); }
  int n_elements() const { return static_cast<int>(elements.size()); }
  double left_edge() const { return a - collar; }
  double right_edge() const { return b + collar; }
  double h_interior() const { return (b - a) / n_interior; }
  double h_exterior() const { return collar / n_exterior; }

  Region node_region(int i) const {
    return (nodes[i] >= a && nodes[i] <= b) ? Region::Interior : Region::Exterior;
  }
  double element_length(int e) const {
    return nodes[elements[e].n1] - nodes[elements[e].n0];
  }
  // Element midpoints' distance measured between supports; 0 for identical or
  // node-sharing pairs.
  double element_gap(int e, int f) const;

  // Index of the element containing x; ties at shared nodes resolve to the
  // element starting at that node (the last node maps to the last element).
  // Throws domain_error outside [a-R, b+R].
  int locate(double x) const;

  // Local barycentric coordinate of x inside element e, in [0,1].
  double local_coord(int e, double x) const {
    return (x - nodes[elements[e].n0]) / element_length(e);
  }

  // Diagonal mesh weight of a node: half the total length of adjacent
  // elements. Used for dual-norm scaling.
  std::vector<double> node_weights() const;

  std::vector<int> interior_node_ids() const;
  std::vector<int> exterior_node_ids() const;
};

// Builds the mesh described above. Node count is n_interior + 2*n_exterior + 1
// minus nothing: interior nodes a=x_0<...<x_n=b share a and b with the collar
// partitions.
//   pre: b > a, n_interior >= 2, n_exterior >= 1, collar > 0
Mesh build_mesh(double a, double b, int n_interior, double collar, int n_exterior);

// Piecewise-linear nodal function on a Mesh. Implicitly zero beyond the
// collar: operator() returns 0 outside [a-R, b+R].
struct DiscreteFunction {
  const Mesh* mesh = nullptr;
  std::vector<double> values;

  DiscreteFunction() = default;
  explicit DiscreteFunction(const Mesh& m)
      : mesh(&m), values(m.nodes.size(), 0.0) {}

  double operator()(double x) const;

  double min_interior() const;
  double max_interior() const;
  double min_exterior() const;
  double max_exterior() const;
};

// Nodal interpolation of a scalar function. Throws domain_error if f produces
// a non-finite value at a node.
DiscreteFunction interpolate(const Mesh& mesh, const std::function<double(double)>& f);

}  // namespace nln
