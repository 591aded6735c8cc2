#pragma once

#include <array>
#include <functional>
#include <optional>
#include <vector>

#include "gradfit/geometry.hpp"

namespace gradfit {

// Quadrature rule in barycentric coordinates. dim==2: triangle rule with
// barycentric triples; dim==1: edge rule, points stored as (1-t, t, 0).
// Weights are normalized to the reference measure and sum to 1, so
// integrals evaluate as measure(K) * sum_i w_i f(x_i).
struct QuadRule {
  int dim = 2;
  int exact_degree = 0;
  std::vector<std::array<double, 3>> points;
  std::vector<double> weights;

  size_t size() const { return points.size(); }
};

// Symmetric rules for degree <= 5, collapsed tensor Gauss-Legendre above.
// Supported range 1..20.
QuadRule triangle_rule(int degree);

// Gauss-Legendre on [0,1], exact for polynomials of the given degree.
QuadRule edge_rule(int degree);

using ScalarField = std::function<double(Vec2)>;

// Plain mapped rule; no singularity handling.
double integrate_triangle_plain(const ScalarField& f, const Tri& tri,
                                const QuadRule& rule);

// Covering of the triangle by cells graded geometrically (ratio 1/2) toward
// the hint; the depth is chosen so that successive composite estimates of
// `control` agree to 1e-9 relative (30-level cap). Integrating anything
// else over the same cells reuses that resolution. Returns {tri} when the
// hint lies outside.
std::vector<Tri> graded_cells(const Tri& tri, Vec2 hint, const ScalarField& control,
                              const QuadRule& rule);

// If singular_hint lies in the closed triangle, integrates over the graded
// decomposition with f itself as the convergence control.
double integrate_triangle(const ScalarField& f, const Tri& tri,
                          const QuadRule& rule,
                          std::optional<Vec2> singular_hint = std::nullopt);

double integrate_edge(const ScalarField& f, Vec2 a, Vec2 b,
                      const QuadRule& rule);

}  // namespace gradfit
