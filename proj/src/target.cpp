#include "gradfit/target.hpp"

#include <algorithm>
#include <cmath>

namespace gradfit {

double gradient_consistency_error(const TargetFunction& v, const std::vector<Vec2>& samples,
                                  double diam) {
  const double h = 1e-6 * diam;
  double worst = 0.0;
  for (const Vec2 p : samples) {
    const Vec2 g = v.gradient(p);
    const Vec2 fd{(v.value({p.x + h, p.y}) - v.value({p.x - h, p.y})) / (2 * h),
                  (v.value({p.x, p.y + h}) - v.value({p.x, p.y - h})) / (2 * h)};
    const double scale = std::max(norm(g), 1e-12);
    worst = std::max(worst, dist(g, fd) / scale);
  }
  return worst;
}

std::optional<Vec2> singular_hint(const TargetFunction& v, const Tri& t) {
  for (const Vec2 s : v.singular_points)
    if (t.contains(s, 1e-11)) return s;
  return std::nullopt;
}

}  // namespace gradfit
