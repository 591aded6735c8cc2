#pragma once

#include <array>
#include <span>
#include <vector>

#include "gradfit/geometry.hpp"
#include "gradfit/quadrature.hpp"

namespace gradfit {

inline int tri_node_count(int deg) { return (deg + 1) * (deg + 2) / 2; }

// Barycentric multi-indices of order deg, canonical enumeration. For edges
// the third component is always 0.
std::vector<std::array<int, 3>> tri_multi_indices(int deg);
std::vector<std::array<int, 3>> edge_multi_indices(int deg);

struct LagrangeNode {
  std::array<int, 3> alpha;
  Vec2 location;
};

// Lagrange nodes of a triangle, locations (1/deg) * sum alpha_i p_i.
std::vector<LagrangeNode> lagrange_nodes(int deg, const Tri& t);

// Node location accumulated in ascending-global-id order so that nodes on a
// shared edge coincide bit-exactly between the two elements.
Vec2 node_point(const std::array<int, 3>& vertex_ids, const std::array<Vec2, 3>& coords,
                const std::array<int, 3>& alpha, int deg);

// Nodal basis in the barycentric monomial representation; the coefficient
// matrix solves the Vandermonde system once per (degree, dim) and is cached.
// Supported degrees 1..4.
class ShapeBasis {
 public:
  static const ShapeBasis& triangle(int deg);
  static const ShapeBasis& edge(int deg);

  int degree() const { return degree_; }
  int dim() const { return dim_; }
  int size() const { return static_cast<int>(alphas_.size()); }
  const std::vector<std::array<int, 3>>& alphas() const { return alphas_; }

  // values of all nodal functions at a barycentric point
  void eval(const std::array<double, 3>& lambda, std::span<double> out) const;
  std::vector<double> eval(const std::array<double, 3>& lambda) const;

  // formal partials with respect to each barycentric coordinate
  void eval_bary_derivs(const std::array<double, 3>& lambda,
                        std::array<std::span<double>, 3> out) const;

  // physical gradients on a concrete triangle
  std::vector<Vec2> physical_gradients(const Tri& t,
                                       const std::array<double, 3>& lambda) const;

 private:
  ShapeBasis(int deg, int dim);
  int degree_;
  int dim_;
  std::vector<std::array<int, 3>> alphas_;
  std::vector<double> coeff_;  // column-major: coeff_[mono * n + node]
};

// L2(F)-dual basis of the edge Lagrange basis; stores the inverse unit-edge
// mass matrix. On an edge of length L the physical dual functions are
// psi_z(t) = (1/L) * sum_y minv(z,y) phi_y(t).
class DualFaceBasis {
 public:
  static const DualFaceBasis& get(int deg);

  int degree() const { return deg_; }
  int size() const { return deg_ + 1; }
  double minv(int z, int y) const { return minv_[static_cast<size_t>(z * (deg_ + 1) + y)]; }
  // value of the unit-edge dual function at parameter t
  double eval_unit(int z, double t) const;
  // nodal values of psi_z on an edge of length len
  std::vector<double> values_at_nodes(int z, double len) const;

 private:
  explicit DualFaceBasis(int deg);
  int deg_;
  std::vector<double> minv_;
};

// N_{z;F}(v) = int_F v psi_z with F the segment (a,b) and z indexed along
// the a->b node order.
double scott_zhang_value(const ScalarField& v, int deg, int z_index, Vec2 a, Vec2 b,
                         const QuadRule& erule);

// Reference-node class of a Lagrange node: coefficients sorted decreasingly.
std::array<int, 3> reference_node_class(std::array<int, 3> alpha);
Vec2 reference_node_point(std::array<int, 3> alpha, int deg);

// L2 norms of reference basis functions, keyed by reference-node class.
class RefNormTable {
 public:
  static const RefNormTable& get(int deg);

  double phi_l2(std::array<int, 3> alpha) const;
  double grad_phi_l2(std::array<int, 3> alpha) const;
  // edge-node class norms of the dual basis; alpha must have a zero entry
  double psi_l2(std::array<int, 3> alpha) const;
  // d = |psi_hat| * |phi_hat| for nodes lying on an edge
  double d_zhat(std::array<int, 3> alpha) const;

 private:
  explicit RefNormTable(int deg);
  int deg_;
  std::vector<std::array<int, 3>> classes_;
  std::vector<double> phi_, grad_phi_, psi_;
  size_t class_index(std::array<int, 3> alpha) const;
};

}  // namespace gradfit
