#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "gradfit/geometry.hpp"

namespace testutil {

// Closed form int_Tref x^a y^b = a! b! / (a+b+2)! over the reference
// triangle; the independent oracle for quadrature exactness.
inline double dirichlet_integral(int a, int b) {
  // a! b! / (a+b+2)! computed as a product to avoid overflow
  double v = 1.0;
  int k = 1;
  for (int i = 1; i <= a; ++i) v *= static_cast<double>(i) / (k++);
  for (int i = 1; i <= b; ++i) v *= static_cast<double>(i) / (k++);
  while (k <= a + b + 2) v /= (k++);
  return v;
}

// Composite Simpson on [lo,hi]; n subintervals (even).
inline double simpson(const std::function<double(double)>& f, double lo, double hi, int n) {
  const double h = (hi - lo) / n;
  double s = f(lo) + f(hi);
  for (int i = 1; i < n; ++i) s += f(lo + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

// Gaussian elimination with partial pivoting, independent of the library's
// solver path. A is n x n row-major.
inline std::vector<double> solve_dense(std::vector<double> A, std::vector<double> b) {
  const size_t n = b.size();
  for (size_t col = 0; col < n; ++col) {
    size_t piv = col;
    for (size_t r = col + 1; r < n; ++r)
      if (std::abs(A[r * n + col]) > std::abs(A[piv * n + col])) piv = r;
    for (size_t c = 0; c < n; ++c) std::swap(A[col * n + c], A[piv * n + c]);
    std::swap(b[col], b[piv]);
    for (size_t r = col + 1; r < n; ++r) {
      const double f = A[r * n + col] / A[col * n + col];
      for (size_t c = col; c < n; ++c) A[r * n + c] -= f * A[col * n + c];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n, 0.0);
  for (size_t r = n; r-- > 0;) {
    double s = b[r];
    for (size_t c = r + 1; c < n; ++c) s -= A[r * n + c] * x[c];
    x[r] = s / A[r * n + r];
  }
  return x;
}

inline gradfit::Tri random_triangle(std::mt19937_64& rng, double min_area = 0.05) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  while (true) {
    gradfit::Tri t{{gradfit::Vec2{u(rng), u(rng)}, gradfit::Vec2{u(rng), u(rng)},
                    gradfit::Vec2{u(rng), u(rng)}}};
    if (t.signed_area() < 0) std::swap(t.p[1], t.p[2]);
    if (t.area() > min_area) return t;
  }
}

inline gradfit::Vec2 random_point_in(const gradfit::Tri& t, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double a = u(rng), b = u(rng);
  if (a + b > 1.0) {
    a = 1.0 - a;
    b = 1.0 - b;
  }
  return t.point({1.0 - a - b, a, b});
}

}  // namespace testutil
