#include "gradfit/global_approx.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <memory>

#include "gradfit/errors.hpp"

namespace gradfit {

namespace {

std::vector<Tri> cells_for(const TargetFunction& v, const Tri& t, const QuadRule& rule) {
  const auto hint = singular_hint(v, t);
  if (!hint) return {t};
  return graded_cells(t, *hint, [&](Vec2 p) { return norm2(v.gradient(p)); }, rule);
}

}  // namespace

CsrMatrix assemble_stiffness(const FeSpace& space, Exec exec) {
  const Mesh& mesh = space.mesh();
  const int deg = space.degree();
  const auto& B = ShapeBasis::triangle(deg);
  const int nloc = B.size();
  const auto& actives = space.active_elements();
  const QuadRule rule = triangle_rule(std::max(2 * deg - 2, 1));

  // per-element local matrices (parallel map into indexed slots)
  std::vector<std::vector<double>> local(actives.size());
  parallel_for(static_cast<int>(actives.size()), exec, [&](int ai) {
    const Tri t = mesh.triangle(actives[static_cast<size_t>(ai)]);
    std::vector<double> a(static_cast<size_t>(nloc * nloc), 0.0);
    const double area = t.area();
    for (size_t q = 0; q < rule.size(); ++q) {
      const auto grads = B.physical_gradients(t, rule.points[q]);
      const double w = rule.weights[q] * area;
      for (int i = 0; i < nloc; ++i)
        for (int j = 0; j < nloc; ++j)
          a[static_cast<size_t>(i * nloc + j)] +=
              w * dot(grads[static_cast<size_t>(i)], grads[static_cast<size_t>(j)]);
    }
    local[static_cast<size_t>(ai)] = std::move(a);
  });

  // row incidence in deterministic element order
  const int ndof = space.dof_count();
  std::vector<std::vector<std::array<int, 2>>> incidence(static_cast<size_t>(ndof));
  for (size_t ai = 0; ai < actives.size(); ++ai) {
    const auto& locals = space.element_nodes(actives[ai]);
    for (int i = 0; i < nloc; ++i) {
      const int dof = space.node(locals[static_cast<size_t>(i)]).dof;
      if (dof >= 0) incidence[static_cast<size_t>(dof)].push_back({static_cast<int>(ai), i});
    }
  }

  // per-row sorted merge (parallel over rows, deterministic)
  std::vector<std::vector<std::pair<int, double>>> rows(static_cast<size_t>(ndof));
  parallel_for(ndof, exec, [&](int r) {
    std::vector<std::pair<int, double>> entries;
    for (const auto& [ai, i] : incidence[static_cast<size_t>(r)]) {
      const auto& locals = space.element_nodes(actives[static_cast<size_t>(ai)]);
      for (int j = 0; j < nloc; ++j) {
        const int dof = space.node(locals[static_cast<size_t>(j)]).dof;
        if (dof < 0) continue;
        entries.emplace_back(dof, local[static_cast<size_t>(ai)][static_cast<size_t>(i * nloc + j)]);
      }
    }
    std::sort(entries.begin(), entries.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    auto& row = rows[static_cast<size_t>(r)];
    for (const auto& [c, v] : entries) {
      if (!row.empty() && row.back().first == c)
        row.back().second += v;
      else
        row.emplace_back(c, v);
    }
  });

  CsrMatrix A;
  A.n = ndof;
  A.row_ptr.assign(static_cast<size_t>(ndof) + 1, 0);
  for (int r = 0; r < ndof; ++r)
    A.row_ptr[static_cast<size_t>(r) + 1] =
        A.row_ptr[static_cast<size_t>(r)] + static_cast<int>(rows[static_cast<size_t>(r)].size());
  A.col.reserve(static_cast<size_t>(A.row_ptr.back()));
  A.val.reserve(static_cast<size_t>(A.row_ptr.back()));
  for (int r = 0; r < ndof; ++r)
    for (const auto& [c, v] : rows[static_cast<size_t>(r)]) {
      A.col.push_back(c);
      A.val.push_back(v);
    }
  return A;
}

std::vector<double> assemble_load(const FeSpace& space, const TargetFunction& v,
                                  const QuadRule& rule, Exec exec) {
  const Mesh& mesh = space.mesh();
  const auto& B = ShapeBasis::triangle(space.degree());
  const int nloc = B.size();
  const auto& actives = space.active_elements();

  std::vector<std::vector<double>> local(actives.size());
  parallel_for(static_cast<int>(actives.size()), exec, [&](int ai) {
    const Tri t = mesh.triangle(actives[static_cast<size_t>(ai)]);
    std::vector<double> b(static_cast<size_t>(nloc), 0.0);
    for (const Tri& c : cells_for(v, t, rule)) {
      const double carea = c.area();
      for (size_t q = 0; q < rule.size(); ++q) {
        const Vec2 p = c.point(rule.points[q]);
        const auto grads = B.physical_gradients(t, t.bary(p));
        const Vec2 gv = v.gradient(p);
        const double w = rule.weights[q] * carea;
        for (int i = 0; i < nloc; ++i) b[static_cast<size_t>(i)] += w * dot(gv, grads[static_cast<size_t>(i)]);
      }
    }
    local[static_cast<size_t>(ai)] = std::move(b);
  });

  std::vector<double> rhs(static_cast<size_t>(space.dof_count()), 0.0);
  for (size_t ai = 0; ai < actives.size(); ++ai) {
    const auto& locals = space.element_nodes(actives[ai]);
    for (int i = 0; i < nloc; ++i) {
      const int dof = space.node(locals[static_cast<size_t>(i)]).dof;
      if (dof >= 0) rhs[static_cast<size_t>(dof)] += local[ai][static_cast<size_t>(i)];
    }
  }
  return rhs;
}

std::vector<double> node_masses(const FeSpace& space, Exec exec) {
  const Mesh& mesh = space.mesh();
  const int deg = space.degree();
  const auto& B = ShapeBasis::triangle(deg);
  const int nloc = B.size();
  const auto& actives = space.active_elements();
  const QuadRule rule = triangle_rule(deg);

  std::vector<std::vector<double>> local(actives.size());
  parallel_for(static_cast<int>(actives.size()), exec, [&](int ai) {
    const Tri t = mesh.triangle(actives[static_cast<size_t>(ai)]);
    std::vector<double> m(static_cast<size_t>(nloc), 0.0);
    std::vector<double> vals(static_cast<size_t>(nloc));
    const double area = t.area();
    for (size_t q = 0; q < rule.size(); ++q) {
      B.eval(rule.points[q], vals);
      for (int i = 0; i < nloc; ++i) m[static_cast<size_t>(i)] += rule.weights[q] * area * vals[static_cast<size_t>(i)];
    }
    local[static_cast<size_t>(ai)] = std::move(m);
  });

  std::vector<double> out(static_cast<size_t>(space.node_count()), 0.0);
  for (size_t ai = 0; ai < actives.size(); ++ai) {
    const auto& locals = space.element_nodes(actives[ai]);
    for (int i = 0; i < nloc; ++i) out[static_cast<size_t>(locals[static_cast<size_t>(i)])] += local[ai][static_cast<size_t>(i)];
  }
  return out;
}

double h1_seminorm_error(const TargetFunction& v, const FeSpace& space,
                         std::span<const double> nodal, int quad_degree, Exec exec) {
  const Mesh& mesh = space.mesh();
  const auto& B = ShapeBasis::triangle(space.degree());
  const int nloc = B.size();
  const auto& actives = space.active_elements();
  const QuadRule rule = triangle_rule(quad_degree);

  std::vector<double> per_elem(actives.size(), 0.0);
  parallel_for(static_cast<int>(actives.size()), exec, [&](int ai) {
    const int id = actives[static_cast<size_t>(ai)];
    const Tri t = mesh.triangle(id);
    const auto& locals = space.element_nodes(id);
    double s = 0.0;
    for (const Tri& c : cells_for(v, t, rule)) {
      const double carea = c.area();
      for (size_t q = 0; q < rule.size(); ++q) {
        const Vec2 p = c.point(rule.points[q]);
        const auto grads = B.physical_gradients(t, t.bary(p));
        Vec2 gV{0, 0};
        for (int i = 0; i < nloc; ++i)
          gV += nodal[static_cast<size_t>(locals[static_cast<size_t>(i)])] * grads[static_cast<size_t>(i)];
        s += rule.weights[q] * carea * norm2(v.gradient(p) - gV);
      }
    }
    per_elem[static_cast<size_t>(ai)] = s;
  });
  return std::sqrt(std::max(ordered_sum(per_elem), 0.0));
}

RitzResult ritz_projection(const TargetFunction& v, const FeSpace& space, int quad_degree,
                           double cg_tol, Exec exec) {
  if (space.bc() == BC::dirichlet0 && !v.zero_boundary_trace)
    throw ConfigError("ritz_projection: dirichlet0 space but the target does not declare a "
                      "vanishing boundary trace");

  const QuadRule rule = triangle_rule(quad_degree);
  const CsrMatrix A = assemble_stiffness(space, exec);
  const std::vector<double> b = assemble_load(space, v, rule, exec);
  const bool neumann = space.bc() == BC::neumann;
  const int cap = 20 * space.dof_count() + 2000;
  const CgResult cg = pcg(A, b, cg_tol, cap, exec, neumann);

  RitzResult out;
  out.iterations = cg.iterations;
  out.residual = cg.residual;
  out.nodal.assign(static_cast<size_t>(space.node_count()), 0.0);
  for (int i = 0; i < space.node_count(); ++i) {
    const int dof = space.node(i).dof;
    if (dof >= 0) out.nodal[static_cast<size_t>(i)] = cg.x[static_cast<size_t>(dof)];
  }

  if (neumann) {
    // zero-integral representative of the quotient-space solution
    const auto masses = node_masses(space, exec);
    double integral = 0.0, volume = 0.0;
    for (int i = 0; i < space.node_count(); ++i) {
      integral += masses[static_cast<size_t>(i)] * out.nodal[static_cast<size_t>(i)];
      volume += masses[static_cast<size_t>(i)];  // partition of unity
    }
    const double shift = integral / volume;
    for (auto& x : out.nodal) x -= shift;
  }

  out.E = h1_seminorm_error(v, space, out.nodal, quad_degree, exec);
  if (v.exact_energy) {
    std::vector<double> x(static_cast<size_t>(space.dof_count()), 0.0);
    for (int i = 0; i < space.node_count(); ++i) {
      const int dof = space.node(i).dof;
      if (dof >= 0) x[static_cast<size_t>(dof)] = out.nodal[static_cast<size_t>(i)];
    }
    const double discrete_energy = A.energy(x, exec);
    out.E_energy_identity = std::sqrt(std::max(*v.exact_energy - discrete_energy, 0.0));
  }
  return out;
}

std::vector<double> interpolate(const TargetFunction& v, const FeSpace& space,
                                int quad_degree) {
  const Mesh& mesh = space.mesh();
  const int deg = space.degree();
  const QuadRule rule = triangle_rule(quad_degree);
  const QuadRule erule = edge_rule(quad_degree);

  // one local best fit per element that owns unconstrained nodes
  std::unordered_map<int, LocalBestFit> fits;
  for (int i = 0; i < space.node_count(); ++i) {
    const auto& n = space.node(i);
    if (!n.constrained && !fits.count(n.owner))
      fits.emplace(n.owner, local_best_fit(v, mesh, n.owner, deg, rule));
  }

  std::vector<double> out(static_cast<size_t>(space.node_count()), 0.0);
  for (int i = 0; i < space.node_count(); ++i) {
    const auto& n = space.node(i);
    if (!n.constrained) {
      const auto& locals = space.element_nodes(n.owner);
      const auto it = std::find(locals.begin(), locals.end(), i);
      out[static_cast<size_t>(i)] = fits.at(n.owner).nodal[static_cast<size_t>(it - locals.begin())];
      continue;
    }
    if (n.star_count > 1 && !mesh.is_star_face_connected(n.xy))
      throw ConfigError("interpolate: star is not face-connected");
    if (space.bc() == BC::dirichlet0 && n.on_boundary && v.zero_boundary_trace) {
      out[static_cast<size_t>(i)] = 0.0;  // N_{z;F_z}(v) with F_z on the boundary
      continue;
    }
    out[static_cast<size_t>(i)] = scott_zhang_value(
        v.value, deg, n.sz_index, mesh.vertex(n.sz_face.lo), mesh.vertex(n.sz_face.hi), erule);
  }
  return out;
}

std::vector<double> element_errors(const TargetFunction& v, const Mesh& mesh, int degree,
                                   int quad_degree, Exec exec) {
  const auto actives = mesh.active_elements();
  const QuadRule rule = triangle_rule(quad_degree);
  ShapeBasis::triangle(degree);  // warm the shared tables before the parallel map
  std::vector<double> eps(actives.size(), 0.0);
  parallel_for(static_cast<int>(actives.size()), exec, [&](int ai) {
    const double e = local_best_fit(v, mesh, actives[static_cast<size_t>(ai)], degree, rule).e;
    eps[static_cast<size_t>(ai)] = e * e;
  });
  return eps;
}

double local_error_sum(const TargetFunction& v, const Mesh& mesh, int degree,
                       int quad_degree, Exec exec) {
  const auto eps = element_errors(v, mesh, degree, quad_degree, exec);
  return std::sqrt(std::max(ordered_sum(eps), 0.0));
}

DecouplingResult decoupling_ratio(const TargetFunction& v, const FeSpace& space,
                                  int quad_degree, double cg_tol, Exec exec) {
  DecouplingResult out;
  out.ritz = ritz_projection(v, space, quad_degree, cg_tol, exec);
  out.E = out.ritz.E;
  out.local_sum = local_error_sum(v, space.mesh(), space.degree(), quad_degree, exec);

  // scale for "zero" decisions: the energy of v itself
  std::vector<double> per(space.active_elements().size(), 0.0);
  const QuadRule rule = triangle_rule(quad_degree);
  const auto& actives = space.active_elements();
  for (size_t ai = 0; ai < actives.size(); ++ai) {
    const Tri t = space.mesh().triangle(actives[ai]);
    for (const Tri& c : cells_for(v, t, rule))
      per[ai] += integrate_triangle_plain([&](Vec2 p) { return norm2(v.gradient(p)); }, c, rule);
  }
  const double scale = std::sqrt(std::max(ordered_sum(per), 0.0));

  const double tiny = 1e-9 * std::max(scale, 1e-300);
  if (out.local_sum <= tiny) {
    out.kind = out.E <= tiny ? DecouplingResult::Kind::member : DecouplingResult::Kind::infinite;
    return out;
  }
  out.kind = DecouplingResult::Kind::finite;
  out.ratio = out.E / out.local_sum;
  return out;
}

AprioriResult apriori_bound(const TargetFunction& v, const Mesh& mesh, int degree, int s,
                            double delta_hat, int quad_degree, Exec exec) {
  if (s < 1 || s > degree + 1) throw ConfigError("apriori_bound: need 1 <= s <= degree+1");
  if (!v.deriv || v.max_deriv_order < s)
    throw ConfigError("apriori_bound: target provides no order-" + std::to_string(s) +
                      " derivatives");

  const auto actives = mesh.active_elements();
  const QuadRule rule = triangle_rule(quad_degree);
  std::vector<double> per(actives.size(), 0.0);
  parallel_for(static_cast<int>(actives.size()), exec, [&](int ai) {
    const Tri t = mesh.triangle(actives[static_cast<size_t>(ai)]);
    const double h = t.diameter();
    const auto seminorm_sq = [&](Vec2 p) {
      const auto d = v.deriv(p, s);
      double sum = 0.0;
      for (double x : d) sum += x * x;
      return sum;
    };
    double val = 0.0;
    const auto hint = singular_hint(v, t);
    if (hint)
      val = integrate_triangle(seminorm_sq, t, rule, hint);
    else
      val = integrate_triangle_plain(seminorm_sq, t, rule);
    per[static_cast<size_t>(ai)] = std::pow(h, 2.0 * (s - 1)) * val;
  });

  AprioriResult out;
  out.seminorm_sum = std::sqrt(std::max(ordered_sum(per), 0.0));
  double s_factorial = 1.0;
  for (int i = 2; i <= s; ++i) s_factorial *= i;
  const int half_up = (s + 1) / 2;  // ceil(s/d) for d = 2
  double half_fact = 1.0;
  for (int i = 2; i <= half_up; ++i) half_fact *= i;
  const double cp = poincare_trace_constants(2).c_poincare;
  out.constant = s_factorial / (half_fact * half_fact) * std::pow(cp, s - 1) * delta_hat;
  out.bound = out.constant * out.seminorm_sum;
  return out;
}

TargetFunction discrete_target(const FeSpace& space, std::vector<double> nodal,
                               const std::string& name) {
  struct State {
    const FeSpace* space;
    std::vector<double> nodal;
    mutable std::atomic<int> hint{-1};

    int locate(Vec2 p) const {
      const Mesh& mesh = space->mesh();
      const int h = hint.load(std::memory_order_relaxed);
      if (h >= 0 && mesh.element(h).active && mesh.triangle(h).contains(p, 1e-11)) return h;
      int best = -1;
      double best_slack = -1e300;
      for (int id : space->active_elements()) {
        const auto lam = mesh.triangle(id).bary(p);
        const double slack = std::min({lam[0], lam[1], lam[2]});
        if (slack > best_slack) {
          best_slack = slack;
          best = id;
        }
        if (slack >= 0) break;  // strictly inside
      }
      if (best < 0 || best_slack < -1e-9)
        throw ConfigError("discrete target evaluated outside the mesh");
      hint.store(best, std::memory_order_relaxed);
      return best;
    }
  };
  auto st = std::make_shared<State>();
  st->space = &space;
  st->nodal = std::move(nodal);

  const int deg = space.degree();
  TargetFunction v;
  v.name = name;
  v.zero_boundary_trace = space.bc() == BC::dirichlet0;
  v.value = [st, deg](Vec2 p) {
    const int id = st->locate(p);
    const auto& B = ShapeBasis::triangle(deg);
    const Tri t = st->space->mesh().triangle(id);
    const auto vals = B.eval(t.bary(p));
    const auto& locals = st->space->element_nodes(id);
    double s = 0.0;
    for (size_t i = 0; i < vals.size(); ++i) s += st->nodal[static_cast<size_t>(locals[i])] * vals[i];
    return s;
  };
  v.gradient = [st, deg](Vec2 p) {
    const int id = st->locate(p);
    const auto& B = ShapeBasis::triangle(deg);
    const Tri t = st->space->mesh().triangle(id);
    const auto grads = B.physical_gradients(t, t.bary(p));
    const auto& locals = st->space->element_nodes(id);
    Vec2 g{0, 0};
    for (size_t i = 0; i < grads.size(); ++i) g += st->nodal[static_cast<size_t>(locals[i])] * grads[i];
    return g;
  };
  return v;
}

}  // namespace gradfit
