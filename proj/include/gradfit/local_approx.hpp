#pragma once

#include <mutex>
#include <unordered_map>
#include <vector>

#include "gradfit/basis.hpp"
#include "gradfit/mesh.hpp"
#include "gradfit/quadrature.hpp"
#include "gradfit/target.hpp"

namespace gradfit {

// Best H1-seminorm fit of degree `degree` on one element, mean-matched:
// int_K P = int_K v and grad-orthogonality against the polynomial space.
struct LocalBestFit {
  int element = -1;
  int degree = 0;
  std::vector<double> nodal;  // values of P at the element's Lagrange nodes
  double e = 0.0;             // |grad(v - P)|_{L2(K)}
  bool mean_matched = true;
};

LocalBestFit local_best_fit(const TargetFunction& v, const Tri& t, int degree,
                            const QuadRule& rule);
LocalBestFit local_best_fit(const TargetFunction& v, const Mesh& mesh, int element_id,
                            int degree, const QuadRule& rule);

// Componentwise best L2 approximation of grad v by vectors of degree-(l-1)
// polynomials; always <= local_best_fit(...).e.
double decoupled_local_error(const TargetFunction& v, const Tri& t, int degree,
                             const QuadRule& rule);

double epsilon(const TargetFunction& v, const Tri& t, int degree, const QuadRule& rule);

// Cache of epsilon values keyed by element id; one instance per
// (function, degree, mesh) run. Thread-safe.
class EpsilonCache {
 public:
  double get(const TargetFunction& v, const Mesh& mesh, int element_id, int degree,
             const QuadRule& rule);

 private:
  std::mutex mu_;
  std::unordered_map<int, double> map_;
};

struct LocalConstants {
  double c_poincare = 0.0;
  double c_trace = 0.0;
};

// C_P = 1/j_{1,1} for d = 2, C_Tr = sqrt(C_P (C_P + 2/d)).
LocalConstants poincare_trace_constants(int d = 2);

// Per-node star weight mu_z = (|K|/h_K^2) sum_{K' in star(z)} h_{K'}^2/|K'|.
double mu_z(const Mesh& mesh, int element_id, Vec2 z);

// Theoretical per-element decoupling constant
//   delta_K^2 = 4 d C_Tr sum_{z in L(K) constrained} d_z^2 mu_z
//               h_K^2 |grad Phi_z|_K^2 / |Phi_z|_K^2.
// `constrained` flags the element's local Lagrange nodes. Throws when a
// star around a constrained node is not face-connected.
double delta_k_bound(const Mesh& mesh, int element_id, int degree,
                     const std::vector<char>& constrained);

// Both sides of the zero-mean trace inequality for property tests; w is a
// polynomial given by nodal values of this degree. face = local edge index
// (0: v0-v1, 1: v1-v2, 2: v2-v0).
struct TraceCheck {
  double lhs = 0.0;
  double rhs = 0.0;
};
TraceCheck trace_inequality_check(const std::vector<double>& w_nodal, int degree, const Tri& t,
                                  int face);

}  // namespace gradfit
