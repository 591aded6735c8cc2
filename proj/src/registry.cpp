#include "gradfit/registry.hpp"

#include <cmath>

#include "gradfit/errors.hpp"
#include "gradfit/mesh_io.hpp"

namespace gradfit {

Poly2::Poly2(std::map<std::pair<int, int>, double> coeffs) : c_(std::move(coeffs)) {}

double Poly2::partial(Vec2 p, int ax, int ay) const {
  double s = 0.0;
  for (const auto& [pw, coef] : c_) {
    const auto [i, j] = pw;
    if (i < ax || j < ay) continue;
    double f = coef;
    for (int k = 0; k < ax; ++k) f *= (i - k);
    for (int k = 0; k < ay; ++k) f *= (j - k);
    s += f * std::pow(p.x, i - ax) * std::pow(p.y, j - ay);
  }
  return s;
}

double Poly2::value(Vec2 p) const { return partial(p, 0, 0); }

Vec2 Poly2::gradient(Vec2 p) const { return {partial(p, 1, 0), partial(p, 0, 1)}; }

std::vector<double> Poly2::deriv(Vec2 p, int order) const {
  std::vector<double> out;
  for (int b = 0; b <= order; ++b) out.push_back(partial(p, order - b, b));
  return out;
}

TargetFunction Poly2::as_target(const std::string& name) const {
  const Poly2 self = *this;
  TargetFunction v;
  v.name = name;
  v.value = [self](Vec2 p) { return self.value(p); };
  v.gradient = [self](Vec2 p) { return self.gradient(p); };
  v.deriv = [self](Vec2 p, int s) { return self.deriv(p, s); };
  v.max_deriv_order = 16;
  return v;
}

namespace {

TargetFunction sine_fn() {
  TargetFunction v;
  v.name = "sine";
  v.value = [](Vec2 p) { return std::sin(M_PI * p.x) * std::sin(M_PI * p.y); };
  v.gradient = [](Vec2 p) {
    return Vec2{M_PI * std::cos(M_PI * p.x) * std::sin(M_PI * p.y),
                M_PI * std::sin(M_PI * p.x) * std::cos(M_PI * p.y)};
  };
  // d^k/dx^k sin(pi x) = pi^k sin(pi x + k pi/2)
  v.deriv = [](Vec2 p, int s) {
    std::vector<double> out;
    for (int b = 0; b <= s; ++b) {
      const int a = s - b;
      out.push_back(std::pow(M_PI, s) * std::sin(M_PI * p.x + a * M_PI / 2) *
                    std::sin(M_PI * p.y + b * M_PI / 2));
    }
    return out;
  };
  v.max_deriv_order = 16;
  v.exact_energy = M_PI * M_PI / 2.0;
  v.zero_boundary_trace = true;
  return v;
}

TargetFunction lshape_fn() {
  // r^(2/3) sin(2 theta / 3), theta in [0, 3 pi/2] from the positive x-axis;
  // harmonic with the classical reentrant-corner gradient singularity
  const auto theta = [](Vec2 p) {
    const double t = std::atan2(p.y, p.x);
    return t >= 0 ? t : t + 2.0 * M_PI;
  };
  TargetFunction v;
  v.name = "lshape";
  v.value = [theta](Vec2 p) {
    const double r = norm(p);
    if (r == 0) return 0.0;
    return std::pow(r, 2.0 / 3.0) * std::sin(2.0 * theta(p) / 3.0);
  };
  v.gradient = [theta](Vec2 p) {
    const double r = norm(p);
    const double th = theta(p);
    const double dr = 2.0 / 3.0 * std::pow(r, -1.0 / 3.0);
    const double s = std::sin(2.0 * th / 3.0), c = std::cos(2.0 * th / 3.0);
    // grad = v_r e_r + (1/r) v_theta e_theta
    const Vec2 er{std::cos(th), std::sin(th)};
    const Vec2 et{-std::sin(th), std::cos(th)};
    return dr * s * er + dr * c * et;
  };
  v.singular_points = {Vec2{0, 0}};
  return v;
}

TargetFunction atan_layer_fn() {
  TargetFunction v;
  v.name = "atan_layer";
  v.value = [](Vec2 p) { return std::atan(100.0 * (p.x + p.y - 1.0)); };
  v.gradient = [](Vec2 p) {
    const double u = 100.0 * (p.x + p.y - 1.0);
    const double d = 100.0 / (1.0 + u * u);
    return Vec2{d, d};
  };
  v.deriv = [](Vec2 p, int s) -> std::vector<double> {
    const double u = 100.0 * (p.x + p.y - 1.0);
    if (s == 1) {
      const double d = 100.0 / (1.0 + u * u);
      return {d, d};
    }
    if (s == 2) {
      const double d2 = -2.0e4 * u / ((1.0 + u * u) * (1.0 + u * u));
      return {d2, d2, d2};
    }
    throw ConfigError("atan_layer: derivatives available up to order 2");
  };
  v.max_deriv_order = 2;
  return v;
}

TargetFunction bump_fn(const std::string& name, Vec2 center, double width, double poly_x2) {
  TargetFunction v;
  v.name = name;
  v.value = [=](Vec2 p) {
    return poly_x2 * p.x * p.x + std::exp(-norm2(p - center) / width);
  };
  v.gradient = [=](Vec2 p) {
    const Vec2 d = p - center;
    const double b = std::exp(-norm2(d) / width);
    return Vec2{2.0 * poly_x2 * p.x, 0.0} + (-2.0 / width * b) * d;
  };
  return v;
}

std::vector<Vec2> sample_points(const TargetFunction& v) {
  std::vector<Vec2> pts;
  for (double x : {0.15, 0.45, 0.85})
    for (double y : {0.2, 0.55, 0.9}) pts.push_back({x, y});
  if (v.name == "lshape")  // keep away from the corner and the slit
    pts = {{-0.5, 0.5}, {-0.7, -0.3}, {0.3, 0.6}, {-0.2, 0.8}, {-0.6, -0.8}};
  return pts;
}

std::vector<std::pair<std::string, RegistryEntry>> build_registry() {
  std::vector<std::pair<std::string, RegistryEntry>> entries;

  RegistryEntry sine;
  sine.fn = sine_fn();
  sine.dirichlet0_ok = true;
  entries.emplace_back("sine", sine);

  const std::vector<std::map<std::pair<int, int>, double>> polys{
      {{{1, 0}, 0.75}, {{0, 1}, -0.5}, {{0, 0}, 0.25}},
      {{{2, 0}, 1.0}, {{1, 1}, 0.5}, {{0, 2}, -1.0}, {{1, 0}, 1.0}},
      {{{3, 0}, 1.0}, {{1, 2}, -2.0}, {{0, 3}, 1.0}, {{2, 0}, 0.5}},
      {{{4, 0}, 1.0}, {{2, 2}, 1.0}, {{0, 4}, -1.0}, {{3, 1}, 0.5}}};
  for (size_t k = 0; k < polys.size(); ++k) {
    RegistryEntry e;
    e.fn = Poly2(polys[k]).as_target("poly_" + std::to_string(k + 1));
    entries.emplace_back(e.fn.name, e);
  }

  RegistryEntry lshape;
  lshape.fn = lshape_fn();
  lshape.default_mesh = "builtin:l-shape";
  entries.emplace_back("lshape", lshape);

  RegistryEntry layer;
  layer.fn = atan_layer_fn();
  entries.emplace_back("atan_layer", layer);

  RegistryEntry bump;
  bump.fn = bump_fn("bump", {0.7, 0.3}, 0.08, 0.0);
  entries.emplace_back("bump", bump);
  RegistryEntry poly_bump;
  poly_bump.fn = bump_fn("poly_bump", {0.7, 0.3}, 0.08, 1.0);
  entries.emplace_back("poly_bump", poly_bump);
  RegistryEntry poly_bump2;
  poly_bump2.fn = bump_fn("poly_bump2", {0.3, 0.65}, 0.05, 0.5);
  entries.emplace_back("poly_bump2", poly_bump2);

  for (const auto& [name, e] : entries) {
    const double err = gradient_consistency_error(e.fn, sample_points(e.fn), 1.0);
    if (err > 1e-5)
      throw NumericalError("registry: gradient check failed for " + name + " (" +
                           std::to_string(err) + ")");
  }
  return entries;
}

}  // namespace

const std::vector<std::pair<std::string, RegistryEntry>>& registry() {
  static const auto entries = build_registry();
  return entries;
}

const RegistryEntry& find_function(const std::string& name) {
  for (const auto& [n, e] : registry())
    if (n == name) return e;
  throw ConfigError("unknown function: " + name);
}

Mesh mesh_from_spec(const std::string& spec) {
  if (spec == "builtin:unit-square" || spec == "unit-square") return unit_square_mesh();
  if (spec == "builtin:l-shape" || spec == "l-shape") return l_shape_mesh();
  return read_mesh_file(spec);
}

}  // namespace gradfit
