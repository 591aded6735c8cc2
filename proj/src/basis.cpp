#include "gradfit/basis.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

#include "gradfit/errors.hpp"

namespace gradfit {

namespace {

constexpr int kMaxDegree = 4;

void check_degree(int deg) {
  if (deg < 1 || deg > kMaxDegree)
    throw ConfigError("basis: supported degrees are 1..4, got " + std::to_string(deg));
}

double bary_pow(const std::array<double, 3>& l, const std::array<int, 3>& a) {
  double p = 1.0;
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < a[static_cast<size_t>(i)]; ++k) p *= l[static_cast<size_t>(i)];
  return p;
}

}  // namespace

std::vector<std::array<int, 3>> tri_multi_indices(int deg) {
  std::vector<std::array<int, 3>> out;
  out.reserve(static_cast<size_t>(tri_node_count(deg)));
  for (int a0 = deg; a0 >= 0; --a0)
    for (int a1 = deg - a0; a1 >= 0; --a1) out.push_back({a0, a1, deg - a0 - a1});
  return out;
}

std::vector<std::array<int, 3>> edge_multi_indices(int deg) {
  std::vector<std::array<int, 3>> out;
  out.reserve(static_cast<size_t>(deg) + 1);
  for (int a0 = deg; a0 >= 0; --a0) out.push_back({a0, deg - a0, 0});
  return out;
}

std::vector<LagrangeNode> lagrange_nodes(int deg, const Tri& t) {
  check_degree(deg);
  std::vector<LagrangeNode> nodes;
  for (const auto& a : tri_multi_indices(deg)) {
    const std::array<double, 3> l{static_cast<double>(a[0]) / deg,
                                  static_cast<double>(a[1]) / deg,
                                  static_cast<double>(a[2]) / deg};
    nodes.push_back({a, t.point(l)});
  }
  return nodes;
}

Vec2 node_point(const std::array<int, 3>& vertex_ids, const std::array<Vec2, 3>& coords,
                const std::array<int, 3>& alpha, int deg) {
  std::array<int, 3> order{0, 1, 2};
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return vertex_ids[static_cast<size_t>(a)] < vertex_ids[static_cast<size_t>(b)];
  });
  Vec2 p{0.0, 0.0};
  for (int i : order) {
    const int a = alpha[static_cast<size_t>(i)];
    if (a == 0) continue;
    const double w = static_cast<double>(a) / deg;
    p += w * coords[static_cast<size_t>(i)];
  }
  return p;
}

ShapeBasis::ShapeBasis(int deg, int dim) : degree_(deg), dim_(dim) {
  alphas_ = dim == 2 ? tri_multi_indices(deg) : edge_multi_indices(deg);
  const int n = size();
  Eigen::MatrixXd V(n, n);
  for (int node = 0; node < n; ++node) {
    std::array<double, 3> l{};
    for (int i = 0; i < 3; ++i)
      l[static_cast<size_t>(i)] =
          static_cast<double>(alphas_[static_cast<size_t>(node)][static_cast<size_t>(i)]) / deg;
    for (int mono = 0; mono < n; ++mono)
      V(node, mono) = bary_pow(l, alphas_[static_cast<size_t>(mono)]);
  }
  const Eigen::MatrixXd C = V.partialPivLu().solve(Eigen::MatrixXd::Identity(n, n));
  coeff_.resize(static_cast<size_t>(n) * static_cast<size_t>(n));
  for (int mono = 0; mono < n; ++mono)
    for (int node = 0; node < n; ++node)
      coeff_[static_cast<size_t>(mono * n + node)] = C(mono, node);
}

const ShapeBasis& ShapeBasis::triangle(int deg) {
  check_degree(deg);
  static const std::array<ShapeBasis, 4> bases{ShapeBasis(1, 2), ShapeBasis(2, 2),
                                               ShapeBasis(3, 2), ShapeBasis(4, 2)};
  return bases[static_cast<size_t>(deg - 1)];
}

const ShapeBasis& ShapeBasis::edge(int deg) {
  check_degree(deg);
  static const std::array<ShapeBasis, 4> bases{ShapeBasis(1, 1), ShapeBasis(2, 1),
                                               ShapeBasis(3, 1), ShapeBasis(4, 1)};
  return bases[static_cast<size_t>(deg - 1)];
}

void ShapeBasis::eval(const std::array<double, 3>& lambda, std::span<double> out) const {
  const int n = size();
  for (int node = 0; node < n; ++node) out[static_cast<size_t>(node)] = 0.0;
  for (int mono = 0; mono < n; ++mono) {
    const double m = bary_pow(lambda, alphas_[static_cast<size_t>(mono)]);
    const double* col = &coeff_[static_cast<size_t>(mono * n)];
    for (int node = 0; node < n; ++node) out[static_cast<size_t>(node)] += m * col[node];
  }
}

std::vector<double> ShapeBasis::eval(const std::array<double, 3>& lambda) const {
  std::vector<double> out(static_cast<size_t>(size()));
  eval(lambda, out);
  return out;
}

void ShapeBasis::eval_bary_derivs(const std::array<double, 3>& lambda,
                                  std::array<std::span<double>, 3> out) const {
  const int n = size();
  for (int i = 0; i < 3; ++i)
    for (int node = 0; node < n; ++node) out[static_cast<size_t>(i)][static_cast<size_t>(node)] = 0.0;
  for (int mono = 0; mono < n; ++mono) {
    const auto& a = alphas_[static_cast<size_t>(mono)];
    const double* col = &coeff_[static_cast<size_t>(mono * n)];
    for (int i = 0; i < 3; ++i) {
      if (a[static_cast<size_t>(i)] == 0) continue;
      std::array<int, 3> am = a;
      --am[static_cast<size_t>(i)];
      const double d = a[static_cast<size_t>(i)] * bary_pow(lambda, am);
      for (int node = 0; node < n; ++node)
        out[static_cast<size_t>(i)][static_cast<size_t>(node)] += d * col[node];
    }
  }
}

std::vector<Vec2> ShapeBasis::physical_gradients(const Tri& t,
                                                 const std::array<double, 3>& lambda) const {
  const int n = size();
  std::vector<double> d0(static_cast<size_t>(n)), d1(static_cast<size_t>(n)),
      d2(static_cast<size_t>(n));
  eval_bary_derivs(lambda, {std::span<double>(d0), std::span<double>(d1), std::span<double>(d2)});
  const auto g = t.bary_gradients();
  std::vector<Vec2> out(static_cast<size_t>(n));
  for (int node = 0; node < n; ++node) {
    const size_t k = static_cast<size_t>(node);
    out[k] = d0[k] * g[0] + d1[k] * g[1] + d2[k] * g[2];
  }
  return out;
}

DualFaceBasis::DualFaceBasis(int deg) : deg_(deg) {
  const auto& B = ShapeBasis::edge(deg);
  const int n = deg + 1;
  // unit-edge mass matrix by exact quadrature
  const QuadRule rule = edge_rule(2 * deg);
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
  std::vector<double> vals(static_cast<size_t>(n));
  for (size_t q = 0; q < rule.size(); ++q) {
    B.eval(rule.points[q], vals);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        M(i, j) += rule.weights[q] * vals[static_cast<size_t>(i)] * vals[static_cast<size_t>(j)];
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
  if (!lu.isInvertible()) throw NumericalError("dual face basis: singular edge mass matrix");
  const Eigen::MatrixXd Minv = lu.inverse();
  minv_.resize(static_cast<size_t>(n) * static_cast<size_t>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) minv_[static_cast<size_t>(i * n + j)] = Minv(i, j);
}

const DualFaceBasis& DualFaceBasis::get(int deg) {
  check_degree(deg);
  static const std::array<DualFaceBasis, 4> bases{DualFaceBasis(1), DualFaceBasis(2),
                                                  DualFaceBasis(3), DualFaceBasis(4)};
  return bases[static_cast<size_t>(deg - 1)];
}

double DualFaceBasis::eval_unit(int z, double t) const {
  const auto& B = ShapeBasis::edge(deg_);
  const auto vals = B.eval({1.0 - t, t, 0.0});
  double s = 0.0;
  for (int y = 0; y < size(); ++y) s += minv(z, y) * vals[static_cast<size_t>(y)];
  return s;
}

std::vector<double> DualFaceBasis::values_at_nodes(int z, double len) const {
  std::vector<double> out(static_cast<size_t>(size()));
  for (int y = 0; y < size(); ++y) out[static_cast<size_t>(y)] = minv(z, y) / len;
  return out;
}

double scott_zhang_value(const ScalarField& v, int deg, int z_index, Vec2 a, Vec2 b,
                         const QuadRule& erule) {
  check_degree(deg);
  const auto& D = DualFaceBasis::get(deg);
  const double len = dist(a, b);
  const auto psi = [&](Vec2 x) {
    const double t = len > 0 ? dot(x - a, b - a) / (len * len) : 0.0;
    return D.eval_unit(z_index, t) / len;
  };
  return integrate_edge([&](Vec2 x) { return v(x) * psi(x); }, a, b, erule);
}

std::array<int, 3> reference_node_class(std::array<int, 3> alpha) {
  std::sort(alpha.begin(), alpha.end(), std::greater<int>());
  return alpha;
}

Vec2 reference_node_point(std::array<int, 3> alpha, int deg) {
  const auto s = reference_node_class(alpha);
  return {static_cast<double>(s[1]) / deg, static_cast<double>(s[2]) / deg};
}

RefNormTable::RefNormTable(int deg) : deg_(deg) {
  // distinct sorted classes
  for (const auto& a : tri_multi_indices(deg)) {
    const auto c = reference_node_class(a);
    if (std::find(classes_.begin(), classes_.end(), c) == classes_.end()) classes_.push_back(c);
  }
  phi_.assign(classes_.size(), 0.0);
  grad_phi_.assign(classes_.size(), 0.0);
  psi_.assign(classes_.size(), -1.0);

  const Tri ref{{Vec2{0, 0}, Vec2{1, 0}, Vec2{0, 1}}};
  const auto& B = ShapeBasis::triangle(deg);
  const auto nodes = tri_multi_indices(deg);
  const QuadRule rule = triangle_rule(2 * deg);

  std::vector<double> phi2(nodes.size(), 0.0), grad2(nodes.size(), 0.0);
  std::vector<double> vals(nodes.size());
  for (size_t q = 0; q < rule.size(); ++q) {
    B.eval(rule.points[q], vals);
    const auto grads = B.physical_gradients(ref, rule.points[q]);
    for (size_t n = 0; n < nodes.size(); ++n) {
      phi2[n] += rule.weights[q] * vals[n] * vals[n];
      grad2[n] += rule.weights[q] * norm2(grads[n]);
    }
  }
  for (size_t n = 0; n < nodes.size(); ++n) {
    const size_t c = class_index(nodes[n]);
    phi_[c] = std::sqrt(0.5 * phi2[n]);
    // the gradient norm is not permutation-invariant; keyed to the sorted
    // representative node, matching the reference-node map
    if (nodes[n] == reference_node_class(nodes[n])) grad_phi_[c] = std::sqrt(0.5 * grad2[n]);
  }

  // dual norms on the unit edge, keyed by the edge classes (zero last entry)
  const auto& D = DualFaceBasis::get(deg);
  const QuadRule erule = edge_rule(2 * deg);
  const auto enodes = edge_multi_indices(deg);
  for (size_t n = 0; n < enodes.size(); ++n) {
    double s = 0.0;
    for (size_t q = 0; q < erule.size(); ++q) {
      const double t = erule.points[q][1];
      const double p = D.eval_unit(static_cast<int>(n), t);
      s += erule.weights[q] * p * p;
    }
    psi_[class_index(reference_node_class(enodes[n]))] = std::sqrt(s);
  }
}

size_t RefNormTable::class_index(std::array<int, 3> alpha) const {
  const auto c = reference_node_class(alpha);
  const auto it = std::find(classes_.begin(), classes_.end(), c);
  if (it == classes_.end()) throw ConfigError("RefNormTable: node class of wrong degree");
  return static_cast<size_t>(it - classes_.begin());
}

double RefNormTable::phi_l2(std::array<int, 3> alpha) const { return phi_[class_index(alpha)]; }
double RefNormTable::grad_phi_l2(std::array<int, 3> alpha) const {
  return grad_phi_[class_index(alpha)];
}

double RefNormTable::psi_l2(std::array<int, 3> alpha) const {
  const double v = psi_[class_index(alpha)];
  if (v < 0) throw ConfigError("RefNormTable: psi norm requested for a non-edge node class");
  return v;
}

double RefNormTable::d_zhat(std::array<int, 3> alpha) const {
  return psi_l2(alpha) * phi_l2(alpha);
}

const RefNormTable& RefNormTable::get(int deg) {
  check_degree(deg);
  static const std::array<RefNormTable, 4> tables{RefNormTable(1), RefNormTable(2),
                                                  RefNormTable(3), RefNormTable(4)};
  return tables[static_cast<size_t>(deg - 1)];
}

}  // namespace gradfit
