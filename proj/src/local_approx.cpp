#include "gradfit/local_approx.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "gradfit/errors.hpp"

namespace gradfit {

namespace {

// Cells covering K, graded toward a singular point of v when present. The
// control integrand is |grad v|^2, which dominates the error functionals.
std::vector<Tri> cells_for(const TargetFunction& v, const Tri& t, const QuadRule& rule) {
  const auto hint = singular_hint(v, t);
  if (!hint) return {t};
  return graded_cells(t, *hint, [&](Vec2 p) { return norm2(v.gradient(p)); }, rule);
}

double integrate_cells(const ScalarField& f, const std::vector<Tri>& cells,
                       const QuadRule& rule) {
  double s = 0.0;
  for (const Tri& c : cells) s += integrate_triangle_plain(f, c, rule);
  return s;
}

}  // namespace

LocalBestFit local_best_fit(const TargetFunction& v, const Tri& t, int degree,
                            const QuadRule& rule) {
  const auto& B = ShapeBasis::triangle(degree);
  const int n = B.size();
  const double area = t.area();
  if (!(area > 0) || !std::isfinite(area))
    throw NumericalError("local_best_fit: degenerate element");

  // exact integrals of the basis: gradient Gram matrix and node masses
  const QuadRule exact = triangle_rule(std::max(2 * degree, 1));
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd mass = Eigen::VectorXd::Zero(n);
  std::vector<double> vals(static_cast<size_t>(n));
  for (size_t q = 0; q < exact.size(); ++q) {
    const auto grads = B.physical_gradients(t, exact.points[q]);
    B.eval(exact.points[q], vals);
    const double w = exact.weights[q] * area;
    for (int i = 0; i < n; ++i) {
      mass(i) += w * vals[static_cast<size_t>(i)];
      for (int j = 0; j < n; ++j)
        G(i, j) += w * dot(grads[static_cast<size_t>(i)], grads[static_cast<size_t>(j)]);
    }
  }

  const auto cells = cells_for(v, t, rule);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  double mean_v = 0.0;
  for (const Tri& c : cells) {
    const double carea = c.area();
    for (size_t q = 0; q < rule.size(); ++q) {
      const Vec2 p = c.point(rule.points[q]);
      const double w = rule.weights[q] * carea;
      const Vec2 gv = v.gradient(p);
      const auto lam = t.bary(p);
      const auto grads = B.physical_gradients(t, lam);
      for (int i = 0; i < n; ++i) b(i) += w * dot(gv, grads[static_cast<size_t>(i)]);
      mean_v += w * v.value(p);
    }
  }
  mean_v /= area;

  // zero-mean basis q_i = Phi_i - mass_i/|K| (the n of them sum to zero, so
  // the first n-1 span the zero-mean complement); gradients are unchanged
  const int m = n - 1;
  const Eigen::MatrixXd Gr = G.topLeftCorner(m, m);
  const Eigen::VectorXd br = b.head(m);
  const Eigen::VectorXd c = Gr.ldlt().solve(br);

  LocalBestFit fit;
  fit.degree = degree;
  fit.nodal.assign(static_cast<size_t>(n), 0.0);
  double shift = 0.0;
  for (int i = 0; i < m; ++i) shift += c(i) * mass(i) / area;
  for (int j = 0; j < n; ++j)
    fit.nodal[static_cast<size_t>(j)] = (j < m ? c(j) : 0.0) - shift + mean_v;

  const auto grad_p = [&](Vec2 p) {
    const auto grads = B.physical_gradients(t, t.bary(p));
    Vec2 g{0, 0};
    for (int i = 0; i < n; ++i) g += fit.nodal[static_cast<size_t>(i)] * grads[static_cast<size_t>(i)];
    return g;
  };
  const double e2 =
      integrate_cells([&](Vec2 p) { return norm2(v.gradient(p) - grad_p(p)); }, cells, rule);
  fit.e = std::sqrt(std::max(e2, 0.0));
  return fit;
}

LocalBestFit local_best_fit(const TargetFunction& v, const Mesh& mesh, int element_id,
                            int degree, const QuadRule& rule) {
  LocalBestFit fit = local_best_fit(v, mesh.triangle(element_id), degree, rule);
  fit.element = element_id;
  return fit;
}

double decoupled_local_error(const TargetFunction& v, const Tri& t, int degree,
                             const QuadRule& rule) {
  const double area = t.area();
  if (!(area > 0) || !std::isfinite(area))
    throw NumericalError("decoupled_local_error: degenerate element");
  const auto cells = cells_for(v, t, rule);

  const auto component = [&](int i) {
    return [&v, i](Vec2 p) { return i == 0 ? v.gradient(p).x : v.gradient(p).y; };
  };

  double sum = 0.0;
  if (degree == 1) {
    // projection onto constants
    for (int i = 0; i < 2; ++i) {
      const auto di = component(i);
      const double mean = integrate_cells(di, cells, rule) / area;
      const double res = integrate_cells(
          [&](Vec2 p) { return (di(p) - mean) * (di(p) - mean); }, cells, rule);
      sum += std::max(res, 0.0);
    }
    return std::sqrt(sum);
  }

  const auto& B = ShapeBasis::triangle(degree - 1);
  const int n = B.size();
  const QuadRule exact = triangle_rule(2 * (degree - 1));
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
  std::vector<double> vals(static_cast<size_t>(n));
  for (size_t q = 0; q < exact.size(); ++q) {
    B.eval(exact.points[q], vals);
    const double w = exact.weights[q] * area;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        M(i, j) += w * vals[static_cast<size_t>(i)] * vals[static_cast<size_t>(j)];
  }
  const Eigen::LDLT<Eigen::MatrixXd> solver(M);

  for (int i = 0; i < 2; ++i) {
    const auto di = component(i);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    for (const Tri& c : cells) {
      const double carea = c.area();
      for (size_t q = 0; q < rule.size(); ++q) {
        const Vec2 p = c.point(rule.points[q]);
        B.eval(t.bary(p), vals);
        const double w = rule.weights[q] * carea * di(p);
        for (int k = 0; k < n; ++k) rhs(k) += w * vals[static_cast<size_t>(k)];
      }
    }
    const Eigen::VectorXd coef = solver.solve(rhs);
    const auto proj = [&](Vec2 p) {
      B.eval(t.bary(p), vals);
      double s = 0.0;
      for (int k = 0; k < n; ++k) s += coef(k) * vals[static_cast<size_t>(k)];
      return s;
    };
    const double res = integrate_cells(
        [&](Vec2 p) { const double r = di(p) - proj(p); return r * r; }, cells, rule);
    sum += std::max(res, 0.0);
  }
  return std::sqrt(sum);
}

double epsilon(const TargetFunction& v, const Tri& t, int degree, const QuadRule& rule) {
  const double e = local_best_fit(v, t, degree, rule).e;
  return e * e;
}

double EpsilonCache::get(const TargetFunction& v, const Mesh& mesh, int element_id, int degree,
                         const QuadRule& rule) {
  {
    std::lock_guard<std::mutex> lock(mu_);
    if (auto it = map_.find(element_id); it != map_.end()) return it->second;
  }
  const double value = epsilon(v, mesh.triangle(element_id), degree, rule);
  std::lock_guard<std::mutex> lock(mu_);
  map_.emplace(element_id, value);
  return value;
}

LocalConstants poincare_trace_constants(int d) {
  LocalConstants c;
  // first positive root of the Bessel function J1 (optimal for d = 2)
  constexpr double j11 = 3.8317059702075123;
  c.c_poincare = d == 2 ? 1.0 / j11 : 1.0 / M_PI;
  c.c_trace = std::sqrt(c.c_poincare * (c.c_poincare + 2.0 / d));
  return c;
}

double mu_z(const Mesh& mesh, int element_id, Vec2 z) {
  const Tri t = mesh.triangle(element_id);
  const double h = t.diameter();
  double s = 0.0;
  for (int k : mesh.star(z)) {
    const Tri tk = mesh.triangle(k);
    const double hk = tk.diameter();
    s += hk * hk / tk.area();
  }
  return t.area() / (h * h) * s;
}

double delta_k_bound(const Mesh& mesh, int element_id, int degree,
                     const std::vector<char>& constrained) {
  const Tri t = mesh.triangle(element_id);
  const auto nodes = lagrange_nodes(degree, t);
  if (constrained.size() != nodes.size())
    throw ConfigError("delta_k_bound: constrained flag count mismatch");

  const auto& B = ShapeBasis::triangle(degree);
  const auto& ref = RefNormTable::get(degree);
  const double h = t.diameter();
  const double area = t.area();
  const QuadRule exact = triangle_rule(2 * degree);

  // physical norms of all nodal functions on K
  const int n = B.size();
  std::vector<double> phi2(static_cast<size_t>(n), 0.0), grad2(static_cast<size_t>(n), 0.0);
  std::vector<double> vals(static_cast<size_t>(n));
  for (size_t q = 0; q < exact.size(); ++q) {
    B.eval(exact.points[q], vals);
    const auto grads = B.physical_gradients(t, exact.points[q]);
    const double w = exact.weights[q] * area;
    for (int i = 0; i < n; ++i) {
      phi2[static_cast<size_t>(i)] += w * vals[static_cast<size_t>(i)] * vals[static_cast<size_t>(i)];
      grad2[static_cast<size_t>(i)] += w * norm2(grads[static_cast<size_t>(i)]);
    }
  }

  const double c_tr = poincare_trace_constants(2).c_trace;
  double sum = 0.0;
  for (size_t i = 0; i < nodes.size(); ++i) {
    if (!constrained[i]) continue;
    const Vec2 z = nodes[i].location;
    if (!mesh.is_star_face_connected(z))
      throw ConfigError("delta_k_bound: star is not face-connected, bound undefined");
    const double d = ref.d_zhat(nodes[i].alpha);
    sum += d * d * mu_z(mesh, element_id, z) * h * h * grad2[i] / phi2[i];
  }
  return std::sqrt(4.0 * 2.0 * c_tr * sum);
}

TraceCheck trace_inequality_check(const std::vector<double>& w_nodal, int degree, const Tri& t,
                                  int face) {
  const auto& B = ShapeBasis::triangle(degree);
  const int n = B.size();
  if (static_cast<int>(w_nodal.size()) != n)
    throw ConfigError("trace_inequality_check: nodal value count mismatch");
  if (face < 0 || face > 2) throw ConfigError("trace_inequality_check: face index");

  const double area = t.area();
  const QuadRule exact = triangle_rule(2 * degree);
  std::vector<double> vals(static_cast<size_t>(n));

  double mean = 0.0, grad_l2_sq = 0.0, scale = 0.0;
  for (double w : w_nodal) scale = std::max(scale, std::abs(w));
  for (size_t q = 0; q < exact.size(); ++q) {
    B.eval(exact.points[q], vals);
    const auto grads = B.physical_gradients(t, exact.points[q]);
    const double w = exact.weights[q] * area;
    double val = 0.0;
    Vec2 g{0, 0};
    for (int i = 0; i < n; ++i) {
      val += w_nodal[static_cast<size_t>(i)] * vals[static_cast<size_t>(i)];
      g += w_nodal[static_cast<size_t>(i)] * grads[static_cast<size_t>(i)];
    }
    mean += w * val;
    grad_l2_sq += w * norm2(g);
  }
  if (std::abs(mean) > 1e-10 * (scale + 1e-300) * area)
    throw ConfigError("trace_inequality_check: nonzero mean input");

  const Vec2 a = t[face];
  const Vec2 b = t[(face + 1) % 3];
  const QuadRule erule = edge_rule(2 * degree);
  double face_l2_sq = 0.0;
  for (size_t q = 0; q < erule.size(); ++q) {
    const double s = erule.points[q][1];
    std::array<double, 3> lam{0, 0, 0};
    lam[static_cast<size_t>(face)] = 1.0 - s;
    lam[static_cast<size_t>((face + 1) % 3)] = s;
    B.eval(lam, vals);
    double val = 0.0;
    for (int i = 0; i < n; ++i) val += w_nodal[static_cast<size_t>(i)] * vals[static_cast<size_t>(i)];
    face_l2_sq += erule.weights[q] * val * val;
  }
  face_l2_sq *= dist(a, b);

  const double c_tr = poincare_trace_constants(2).c_trace;
  const double h = t.diameter();
  TraceCheck out;
  out.lhs = std::sqrt(face_l2_sq);
  out.rhs = c_tr * std::sqrt(h * dist(a, b) / area) * std::sqrt(h) * std::sqrt(grad_l2_sq);
  return out;
}

}  // namespace gradfit
