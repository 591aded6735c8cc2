#include "gradfit/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gradfit/errors.hpp"

namespace gradfit {

namespace {

// Gauss-Legendre nodes/weights on [-1,1] by Newton iteration on the
// three-term recurrence.
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(static_cast<size_t>(n), 0.0);
  w.assign(static_cast<size_t>(n), 0.0);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    x[static_cast<size_t>(i)] = -z;
    x[static_cast<size_t>(n - 1 - i)] = z;
    const double wi = 2.0 / ((1.0 - z * z) * pp * pp);
    w[static_cast<size_t>(i)] = wi;
    w[static_cast<size_t>(n - 1 - i)] = wi;
  }
}

void push_orbit3(QuadRule& r, double a, double w) {
  // orbit of (1-2a, a, a) under coordinate permutations
  r.points.push_back({1.0 - 2.0 * a, a, a});
  r.points.push_back({a, 1.0 - 2.0 * a, a});
  r.points.push_back({a, a, 1.0 - 2.0 * a});
  r.weights.insert(r.weights.end(), 3, w);
}

QuadRule symmetric_rule(int degree) {
  QuadRule r;
  r.dim = 2;
  r.exact_degree = degree;
  switch (degree) {
    case 1:
      r.points.push_back({1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0});
      r.weights.push_back(1.0);
      break;
    case 2:
      push_orbit3(r, 1.0 / 6.0, 1.0 / 3.0);
      break;
    case 3:
      r.points.push_back({1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0});
      r.weights.push_back(-27.0 / 48.0);
      push_orbit3(r, 1.0 / 5.0, 25.0 / 48.0);
      break;
    case 4:
      push_orbit3(r, 0.445948490915965, 0.223381589678011);
      push_orbit3(r, 0.091576213509771, 0.109951743655322);
      break;
    case 5: {
      const double s15 = std::sqrt(15.0);
      r.points.push_back({1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0});
      r.weights.push_back(9.0 / 40.0);
      push_orbit3(r, (6.0 - s15) / 21.0, (155.0 - s15) / 1200.0);
      push_orbit3(r, (6.0 + s15) / 21.0, (155.0 + s15) / 1200.0);
      break;
    }
    default:
      throw ConfigError("symmetric_rule: degree out of range");
  }
  return r;
}

// Collapsed tensor rule: x Gauss-Legendre absorbing the (1-x) area factor,
// y scaled into the remaining strip. Positive weights, points interior.
QuadRule collapsed_rule(int degree) {
  QuadRule r;
  r.dim = 2;
  r.exact_degree = degree;
  const int n = (degree + 3) / 2;  // handles the +1 degree from the (1-x) factor
  std::vector<double> gx, gw;
  gauss_legendre(n, gx, gw);
  // map to [0,1]
  for (int i = 0; i < n; ++i) {
    gx[static_cast<size_t>(i)] = 0.5 * (gx[static_cast<size_t>(i)] + 1.0);
    gw[static_cast<size_t>(i)] *= 0.5;
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double x = gx[static_cast<size_t>(i)];
      const double y = gx[static_cast<size_t>(j)] * (1.0 - x);
      // reference measure 1/2, weights normalized to sum 1
      const double w = 2.0 * gw[static_cast<size_t>(i)] *
                       gw[static_cast<size_t>(j)] * (1.0 - x);
      r.points.push_back({1.0 - x - y, x, y});
      r.weights.push_back(w);
    }
  }
  return r;
}

}  // namespace

QuadRule triangle_rule(int degree) {
  if (degree < 1 || degree > 20)
    throw ConfigError("triangle_rule: supported degrees are 1..20, got " +
                      std::to_string(degree));
  return degree <= 5 ? symmetric_rule(degree) : collapsed_rule(degree);
}

QuadRule edge_rule(int degree) {
  if (degree < 1 || degree > 60)
    throw ConfigError("edge_rule: supported degrees are 1..60, got " +
                      std::to_string(degree));
  const int n = (degree + 2) / 2;
  std::vector<double> gx, gw;
  gauss_legendre(n, gx, gw);
  QuadRule r;
  r.dim = 1;
  r.exact_degree = 2 * n - 1;
  for (int i = 0; i < n; ++i) {
    const double t = 0.5 * (gx[static_cast<size_t>(i)] + 1.0);
    r.points.push_back({1.0 - t, t, 0.0});
    r.weights.push_back(0.5 * gw[static_cast<size_t>(i)]);
  }
  return r;
}

double integrate_triangle_plain(const ScalarField& f, const Tri& tri,
                                const QuadRule& rule) {
  double s = 0.0;
  for (size_t i = 0; i < rule.size(); ++i)
    s += rule.weights[i] * f(tri.point(rule.points[i]));
  return tri.area() * s;
}

double integrate_edge(const ScalarField& f, Vec2 a, Vec2 b,
                      const QuadRule& rule) {
  double s = 0.0;
  for (size_t i = 0; i < rule.size(); ++i) {
    const double t = rule.points[i][1];
    s += rule.weights[i] * f(a + t * (b - a));
  }
  return dist(a, b) * s;
}

namespace {

constexpr int kGradeLevels = 30;
constexpr double kGradeRelTol = 1e-9;

// Cells for a triangle singular at vertex 0: geometric annuli contracting
// toward the vertex with ratio 1/2, plus the innermost remainder triangle.
// Depth set by convergence of the composite estimate of `control`.
void graded_cells_at_vertex(const Tri& t, const ScalarField& control,
                            const QuadRule& rule, std::vector<Tri>& out) {
  const Vec2 a = t[0];
  Vec2 b = t[1];
  Vec2 c = t[2];
  double total = 0.0;
  double prev = std::numeric_limits<double>::quiet_NaN();
  for (int level = 0; level < kGradeLevels; ++level) {
    const Vec2 mb = a + 0.5 * (b - a);
    const Vec2 mc = a + 0.5 * (c - a);
    const Tri ann1{{mb, b, c}};
    const Tri ann2{{mb, c, mc}};
    const Tri inner{{a, mb, mc}};
    total += integrate_triangle_plain(control, ann1, rule);
    total += integrate_triangle_plain(control, ann2, rule);
    out.push_back(ann1);
    out.push_back(ann2);
    const double estimate = total + integrate_triangle_plain(control, inner, rule);
    if (level > 0) {
      const double scale = std::max(std::abs(estimate), std::abs(prev));
      if (std::abs(estimate - prev) <= kGradeRelTol * std::max(scale, 1e-300)) {
        out.push_back(inner);
        return;
      }
    }
    prev = estimate;
    b = mb;
    c = mc;
  }
  std::ostringstream os;
  os << "composite quadrature did not converge near (" << a.x << ", " << a.y
     << "); achieved estimate " << prev;
  throw NumericalError(os.str());
}

}  // namespace

std::vector<Tri> graded_cells(const Tri& tri, Vec2 hint, const ScalarField& control,
                              const QuadRule& rule) {
  std::vector<Tri> out;
  if (!tri.contains(hint, 1e-12)) return {tri};
  const double tol = 1e-12 * tri.diameter();

  // hint at a vertex: grade directly
  for (int i = 0; i < 3; ++i) {
    if (dist(tri[i], hint) <= tol) {
      graded_cells_at_vertex(Tri{{tri[i], tri[(i + 1) % 3], tri[(i + 2) % 3]}}, control,
                             rule, out);
      return out;
    }
  }
  // otherwise fan-split at the hint so it becomes a vertex of each part
  for (int i = 0; i < 3; ++i) {
    const Tri part{{hint, tri[i], tri[(i + 1) % 3]}};
    if (part.area() <= tol * tol) continue;  // hint on an edge
    graded_cells_at_vertex(part, control, rule, out);
  }
  return out;
}

double integrate_triangle(const ScalarField& f, const Tri& tri,
                          const QuadRule& rule,
                          std::optional<Vec2> singular_hint) {
  if (!singular_hint) return integrate_triangle_plain(f, tri, rule);
  double s = 0.0;
  for (const Tri& cell : graded_cells(tri, *singular_hint, f, rule))
    s += integrate_triangle_plain(f, cell, rule);
  return s;
}

}  // namespace gradfit
