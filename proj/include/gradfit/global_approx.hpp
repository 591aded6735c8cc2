#pragma once

#include <optional>

#include "gradfit/fespace.hpp"
#include "gradfit/local_approx.hpp"
#include "gradfit/parallel.hpp"
#include "gradfit/sparse.hpp"

namespace gradfit {

// Default volume rule degree for the error functionals: integrands are
// (grad(v - P))^2, degree 2l when v is polynomial, plus margin.
inline int default_quad_degree(int degree) { return 2 * degree + 4; }

CsrMatrix assemble_stiffness(const FeSpace& space, Exec exec);
std::vector<double> assemble_load(const FeSpace& space, const TargetFunction& v,
                                  const QuadRule& rule, Exec exec);
// int_Omega Phi_i per node (used for the zero-mean Neumann representative).
std::vector<double> node_masses(const FeSpace& space, Exec exec);

struct RitzResult {
  std::vector<double> nodal;  // full nodal coefficient vector
  double E = 0.0;             // |grad(v - V)| by direct quadrature
  std::optional<double> E_energy_identity;
  int iterations = 0;
  double residual = 0.0;
};

// Galerkin projection in the H1 seminorm. dirichlet0 requires the target to
// declare a vanishing boundary trace; neumann solves in the zero-mean
// quotient (zero-integral representative).
RitzResult ritz_projection(const TargetFunction& v, const FeSpace& space, int quad_degree,
                           double cg_tol, Exec exec);

// |grad(v - V)| for a nodal coefficient vector V.
double h1_seminorm_error(const TargetFunction& v, const FeSpace& space,
                         std::span<const double> nodal, int quad_degree, Exec exec);

// Quasi-interpolant: unconstrained nodes take the mean-matched local best
// fit's nodal value, constrained nodes the Scott-Zhang functional on F_z.
std::vector<double> interpolate(const TargetFunction& v, const FeSpace& space,
                                int quad_degree);

// epsilon(K) per active element, aligned with mesh.active_elements().
std::vector<double> element_errors(const TargetFunction& v, const Mesh& mesh, int degree,
                                   int quad_degree, Exec exec);
// sqrt(sum of epsilon) over active elements.
double local_error_sum(const TargetFunction& v, const Mesh& mesh, int degree,
                       int quad_degree, Exec exec);

struct DecouplingResult {
  enum class Kind { finite, member, infinite };
  Kind kind = Kind::finite;
  double E = 0.0;
  double local_sum = 0.0;
  double ratio = 0.0;  // meaningful for kind == finite
  RitzResult ritz;
};

DecouplingResult decoupling_ratio(const TargetFunction& v, const FeSpace& space,
                                  int quad_degree, double cg_tol, Exec exec);

struct AprioriResult {
  double seminorm_sum = 0.0;  // (sum h^{2(s-1)} |v|_s^2)^{1/2}
  double constant = 0.0;      // s!/(ceil(s/d)!)^d C_P^{s-1} delta
  double bound = 0.0;
};

// Piecewise-regularity error bound with the empirical decoupling ratio of
// the mesh family supplied by the caller.
AprioriResult apriori_bound(const TargetFunction& v, const Mesh& mesh, int degree, int s,
                            double delta_hat, int quad_degree, Exec exec);

// Wraps a coefficient vector as a TargetFunction (piecewise polynomial
// evaluators with point location on the space's mesh).
TargetFunction discrete_target(const FeSpace& space, std::vector<double> nodal,
                               const std::string& name);

}  // namespace gradfit
