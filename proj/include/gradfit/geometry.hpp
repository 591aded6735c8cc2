#pragma once

#include <array>
#include <cmath>

namespace gradfit {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2() = default;
  Vec2(double x_, double y_) : x(x_), y(y_) {}

  Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  Vec2 operator/(double s) const { return {x / s, y / s}; }
  Vec2& operator+=(Vec2 o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  bool operator==(const Vec2&) const = default;
};

inline Vec2 operator*(double s, Vec2 v) { return v * s; }

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm2(Vec2 a) { return dot(a, a); }
inline double norm(Vec2 a) { return std::sqrt(norm2(a)); }
inline double dist(Vec2 a, Vec2 b) { return norm(a - b); }

// Midpoint convention used everywhere a shared point must be reproduced
// bit-exactly; callers pass the endpoints in ascending vertex-id order.
inline Vec2 edge_midpoint(Vec2 lo, Vec2 hi) {
  return {0.5 * lo.x + 0.5 * hi.x, 0.5 * lo.y + 0.5 * hi.y};
}

// Triangle geometry snapshot. Vertex order matters for barycentric
// coordinates: bary(p)[i] is the weight of p[i].
struct Tri {
  std::array<Vec2, 3> p;

  Vec2 operator[](int i) const { return p[static_cast<size_t>(i)]; }

  double signed_area() const { return 0.5 * cross(p[1] - p[0], p[2] - p[0]); }
  double area() const { return std::abs(signed_area()); }

  double diameter() const {
    return std::max({dist(p[0], p[1]), dist(p[1], p[2]), dist(p[2], p[0])});
  }
  double perimeter() const {
    return dist(p[0], p[1]) + dist(p[1], p[2]) + dist(p[2], p[0]);
  }
  // Incircle diameter 4A/P.
  double incircle_diameter() const { return 4.0 * area() / perimeter(); }

  Vec2 point(const std::array<double, 3>& l) const {
    return l[0] * p[0] + l[1] * p[1] + l[2] * p[2];
  }

  std::array<double, 3> bary(Vec2 q) const {
    const double a2 = 2.0 * signed_area();
    const double l1 = 0.5 * cross(q - p[0], p[2] - p[0]) / (0.5 * a2);
    const double l2 = 0.5 * cross(p[1] - p[0], q - p[0]) / (0.5 * a2);
    return {1.0 - l1 - l2, l1, l2};
  }

  // Gradients of the barycentric coordinates (constant over the triangle).
  std::array<Vec2, 3> bary_gradients() const {
    const double a2 = 2.0 * signed_area();
    const Vec2 g1{(p[2].y - p[0].y) / a2, (p[0].x - p[2].x) / a2};
    const Vec2 g2{(p[0].y - p[1].y) / a2, (p[1].x - p[0].x) / a2};
    return {Vec2{-g1.x - g2.x, -g1.y - g2.y}, g1, g2};
  }

  bool contains(Vec2 q, double tol) const {
    const auto l = bary(q);
    return l[0] >= -tol && l[1] >= -tol && l[2] >= -tol;
  }
};

// True if q lies strictly inside segment [a,b] (not at an endpoint),
// with tolerance relative to the segment length.
inline bool strictly_inside_segment(Vec2 q, Vec2 a, Vec2 b, double rel_tol) {
  const double len = dist(a, b);
  const double tol = rel_tol * len;
  if (std::abs(cross(b - a, q - a)) > tol * len) return false;
  const double t = dot(q - a, b - a) / norm2(b - a);
  return t * len > tol && (1.0 - t) * len > tol;
}

}  // namespace gradfit
