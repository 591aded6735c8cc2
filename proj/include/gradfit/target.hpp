#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gradfit/geometry.hpp"

namespace gradfit {

// A target function v with whatever extra analytic structure it can offer.
// `deriv(p, s)` returns the s-th order partials d^(s-i,i) v, i = 0..s;
// available for s <= max_deriv_order.
struct TargetFunction {
  std::string name;
  std::function<double(Vec2)> value;
  std::function<Vec2(Vec2)> gradient;
  std::function<std::vector<double>(Vec2, int)> deriv;
  int max_deriv_order = 1;
  std::vector<Vec2> singular_points;
  std::optional<double> exact_energy;  // |grad v|^2 over the domain
  bool zero_boundary_trace = false;
};

// Relative mismatch between the declared gradient and central finite
// differences of the value, maximized over the sample points.
double gradient_consistency_error(const TargetFunction& v, const std::vector<Vec2>& samples,
                                  double diam);

// Singular point of v inside the closed triangle, if any.
std::optional<Vec2> singular_hint(const TargetFunction& v, const Tri& t);

}  // namespace gradfit
