#include "gradfit/tree.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "gradfit/errors.hpp"
#include "gradfit/global_approx.hpp"

namespace gradfit {

namespace {

// eta(child) = [eps^{-1} + eta_parent^{-1}]^{-1} with the zero guard (the
// harmonic mean's continuous limit).
double harmonic_eta(double eps_child, double eta_parent) {
  if (eps_child <= 0.0 || eta_parent <= 0.0) return 0.0;
  return 1.0 / (1.0 / eps_child + 1.0 / eta_parent);
}

int effective_quad_degree(int degree, int quad_degree) {
  return quad_degree > 0 ? quad_degree : default_quad_degree(degree);
}

struct Grower {
  Mesh& mesh;
  const TargetFunction& v;
  int degree;
  QuadRule rule;
  EpsilonCache cache;
  std::unordered_map<int, TreeNodeInfo>& nodes;
  const TreeOptions& opts;
  int step = 0;
  bool depth_cap_hit = false;
  double eps_sum = 0.0;
  std::vector<double>* trace = nullptr;

  double eps(int id) { return cache.get(v, mesh, id, degree, rule); }

  // bisect `id`, assign eps/eta to the children, log, update the running
  // broken error
  std::pair<int, int> bisect_tracked(int id) {
    const TreeNodeInfo info = nodes.at(id);
    const auto [c1, c2] = mesh.bisect(id);
    for (int c : {c1, c2}) {
      TreeNodeInfo ci;
      ci.eps = eps(c);
      ci.eta = harmonic_eta(ci.eps, info.eta);
      ci.parent = id;
      nodes.emplace(c, ci);
    }
    eps_sum += nodes.at(c1).eps + nodes.at(c2).eps - info.eps;
    if (trace) trace->push_back(std::sqrt(std::max(eps_sum, 0.0)));
    ++step;
    if (opts.log)
      opts.log->push_back({step, id, info.eps, info.eta, mesh.active_count()});
    return {c1, c2};
  }
};

}  // namespace

TreeResult tree_threshold(const TargetFunction& v, const Mesh& mesh0, int degree, double t,
                          const TreeOptions& opts) {
  if (!(t > 0)) throw ConfigError("tree_threshold: threshold must be positive");
  if (!mesh0.is_conforming()) throw ConfigError("tree_threshold: initial mesh not conforming");

  TreeResult out;
  out.mesh = mesh0;
  Grower g{out.mesh, v, degree, triangle_rule(effective_quad_degree(degree, opts.quad_degree)),
           {}, out.nodes, opts};
  g.trace = &out.broken_error_trace;

  std::vector<int> stack;
  for (int id : out.mesh.active_elements()) {
    TreeNodeInfo info;
    info.eps = g.eps(id);
    info.eta = info.eps;  // roots
    out.nodes.emplace(id, info);
    g.eps_sum += info.eps;
    if (info.eta > t) stack.push_back(id);
  }
  while (!stack.empty()) {
    const int id = stack.back();
    stack.pop_back();
    if (out.mesh.element(id).generation >= opts.depth_cap) {
      g.depth_cap_hit = true;
      continue;
    }
    const auto [c1, c2] = g.bisect_tracked(id);
    for (int c : {c1, c2})
      if (out.nodes.at(c).eta > t) stack.push_back(c);
  }

  out.leaves = out.mesh.active_elements();
  out.leaves_before_completion = out.mesh.active_count();
  out.mesh.complete();
  out.size_after_completion = out.mesh.active_count();
  out.depth_cap_hit = g.depth_cap_hit;
  return out;
}

TreeResult tree_budget(const TargetFunction& v, const Mesh& mesh0, int degree, int budget,
                       const TreeOptions& opts) {
  if (budget < mesh0.active_count())
    throw ConfigError("tree_budget: budget below the initial element count");
  if (!mesh0.is_conforming()) throw ConfigError("tree_budget: initial mesh not conforming");

  TreeResult out;
  out.mesh = mesh0;
  Mesh& mesh = out.mesh;
  Grower g{mesh, v, degree, triangle_rule(effective_quad_degree(degree, opts.quad_degree)),
           {}, out.nodes, opts};
  g.trace = &out.broken_error_trace;

  // candidate leaves ordered by (eta desc, id asc)
  struct ByEta {
    bool operator()(const std::pair<double, int>& a, const std::pair<double, int>& b) const {
      return a.first != b.first ? a.first > b.first : a.second < b.second;
    }
  };
  std::set<std::pair<double, int>, ByEta> candidates;
  for (int id : mesh.active_elements()) {
    TreeNodeInfo info;
    info.eps = g.eps(id);
    info.eta = info.eps;
    out.nodes.emplace(id, info);
    g.eps_sum += info.eps;
    candidates.insert({info.eta, id});
  }

  // superset of active elements with a hanging edge (speculative-completion
  // seeds); simulated completions never change it
  std::set<int> hanging;
  int completed_size = mesh.active_count();

  while (!candidates.empty()) {
    const auto [eta, id] = *candidates.begin();
    if (eta <= 0.0) break;  // nothing left to gain
    if (mesh.element(id).generation >= opts.depth_cap) {
      out.depth_cap_hit = true;
      candidates.erase(candidates.begin());
      continue;
    }
    // cheap lower bound: each bisection grows the completed size
    if (completed_size + 1 > budget) break;

    candidates.erase(candidates.begin());
    const size_t mark_bisect = mesh.mark_journal();
    const FaceKey refinement_edge(mesh.element(id).v[0], mesh.element(id).v[1]);
    const auto [c1, c2] = g.bisect_tracked(id);

    // simulate the completion of the current leaf set
    const size_t mark_complete = mesh.mark_journal();
    std::vector<int> seeds(hanging.begin(), hanging.end());
    for (int nb : mesh.edge_elements(refinement_edge))
      if (nb >= 0) seeds.push_back(nb);
    for (int c : {c1, c2}) seeds.push_back(c);
    {
      // closure from the seeds only; the rest of the mesh has no hanging
      // vertices that are not reachable from them
      std::vector<int> work = seeds;
      while (!work.empty()) {
        const int e = work.back();
        work.pop_back();
        if (!mesh.element(e).active) continue;
        bool hangs = false;
        const auto& el = mesh.element(e);
        for (int i = 0; i < 3 && !hangs; ++i)
          if (mesh.midpoint_of(FaceKey(el.v[i], el.v[(i + 1) % 3]))) hangs = true;
        if (!hangs) continue;
        const FaceKey own_edge(el.v[0], el.v[1]);
        const auto [b1, b2] = mesh.bisect(e);
        for (int nb : mesh.edge_elements(own_edge))
          if (nb >= 0) work.push_back(nb);
        work.push_back(b1);
        work.push_back(b2);
      }
    }
    const int simulated = mesh.active_count();
    mesh.rollback_journal(mark_complete);

    if (simulated > budget) {
      // undo the bisection as well and stop
      mesh.rollback_journal(mark_bisect);
      for (int c : {c1, c2}) out.nodes.erase(c);
      candidates.insert({eta, id});
      if (!out.broken_error_trace.empty()) out.broken_error_trace.pop_back();
      if (opts.log && !opts.log->empty()) opts.log->pop_back();
      break;
    }
    completed_size = simulated;

    // bookkeeping for future speculative completions
    hanging.erase(id);
    for (int nb : mesh.edge_elements(refinement_edge))
      if (nb >= 0) hanging.insert(nb);
    for (int c : {c1, c2}) {
      bool hangs = false;
      const auto& el = mesh.element(c);
      for (int i = 0; i < 3 && !hangs; ++i)
        if (mesh.midpoint_of(FaceKey(el.v[i], el.v[(i + 1) % 3]))) hangs = true;
      if (hangs) hanging.insert(c);
      candidates.insert({out.nodes.at(c).eta, c});
    }
  }

  out.leaves = mesh.active_elements();
  out.leaves_before_completion = mesh.active_count();
  mesh.complete();
  out.size_after_completion = mesh.active_count();
  return out;
}

namespace {

struct SigmaEnumerator {
  Mesh scratch;
  const TargetFunction& v;
  int degree;
  QuadRule rule;
  EpsilonCache cache;
  std::vector<double> best;        // best exact broken error^2 per extra-bisection count
  std::vector<double> best_leaf_eps;
  std::vector<int> best_leaves;
  int best_leaf_count = 0;
  double best_overall = std::numeric_limits<double>::infinity();
  int max_extra;
  std::vector<int> pending;

  double eps(int id) { return cache.get(v, scratch, id, degree, rule); }

  std::pair<int, int> children_of(int id) {
    const auto& e = scratch.element(id);
    if (e.children[0] >= 0) return {e.children[0], e.children[1]};
    return scratch.bisect(id);
  }

  void run() {
    best.assign(static_cast<size_t>(max_extra) + 1,
                std::numeric_limits<double>::infinity());
    pending = scratch.active_elements();
    dfs(0, max_extra, 0.0);
  }

  void dfs(size_t idx, int budget_left, double sum) {
    if (idx == pending.size()) {
      const int used = max_extra - budget_left;
      auto& slot = best[static_cast<size_t>(used)];
      if (sum < slot) slot = sum;
      if (sum < best_overall) {
        best_overall = sum;
        best_leaf_count = static_cast<int>(pending.size());
        best_leaves = pending;
        best_leaf_eps.clear();
        for (int id : pending) best_leaf_eps.push_back(eps(id));
      }
      return;
    }
    const int k = pending[idx];
    // keep k as a leaf
    dfs(idx + 1, budget_left, sum + eps(k));
    // or bisect it and decide the children in place
    if (budget_left > 0) {
      const auto [c1, c2] = children_of(k);
      pending[idx] = c1;
      pending.insert(pending.begin() + static_cast<long>(idx) + 1, c2);
      dfs(idx, budget_left - 1, sum);
      pending.erase(pending.begin() + static_cast<long>(idx) + 1);
      pending[idx] = k;
    }
  }
};

constexpr int kSigmaPrimeBudget = 12;

}  // namespace

std::vector<double> sigma_prime_table(const TargetFunction& v, const Mesh& mesh0, int degree,
                                      int max_extra, int quad_degree) {
  if (max_extra < 0 || max_extra > kSigmaPrimeBudget)
    throw ConfigError("sigma_prime: enumeration budget exceeded (max " +
                      std::to_string(kSigmaPrimeBudget) + " extra leaves)");
  SigmaEnumerator en{mesh0, v, degree,
                     triangle_rule(effective_quad_degree(degree, quad_degree)),
                     {}, {}, {}, {}, 0,
                     std::numeric_limits<double>::infinity(), max_extra, {}};
  en.run();
  // sigma'(N0+k) minimizes over at most k bisections: prefix minimum
  std::vector<double> out(en.best.size());
  double run = std::numeric_limits<double>::infinity();
  for (size_t k = 0; k < en.best.size(); ++k) {
    run = std::min(run, en.best[k]);
    out[k] = std::sqrt(std::max(run, 0.0));
  }
  return out;
}

SigmaPrimeResult sigma_prime(const TargetFunction& v, const Mesh& mesh0, int degree, int n,
                             int quad_degree) {
  const int n0 = mesh0.active_count();
  if (n < n0) throw ConfigError("sigma_prime: n below the initial element count");
  const int extra = n - n0;
  if (extra > kSigmaPrimeBudget)
    throw ConfigError("sigma_prime: enumeration budget exceeded (max " +
                      std::to_string(kSigmaPrimeBudget) + " extra leaves)");

  SigmaEnumerator en{mesh0, v, degree,
                     triangle_rule(effective_quad_degree(degree, quad_degree)),
                     {}, {}, {}, {}, 0,
                     std::numeric_limits<double>::infinity(), extra, {}};
  en.run();
  SigmaPrimeResult out;
  out.n = n;
  double run = std::numeric_limits<double>::infinity();
  for (double b : en.best) run = std::min(run, b);
  out.value = std::sqrt(std::max(run, 0.0));
  for (int id : en.best_leaves) out.optimal_leaves.push_back(en.scratch.triangle(id));
  out.optimal_leaf_eps = en.best_leaf_eps;
  out.optimal_leaf_count = en.best_leaf_count;
  return out;
}

std::vector<NearBestRow> near_best_report(const TargetFunction& v, const Mesh& mesh0,
                                          int degree, const std::vector<double>& thresholds,
                                          double cg_tol, int quad_degree) {
  const int qdeg = effective_quad_degree(degree, quad_degree);
  const int n0 = mesh0.active_count();

  std::vector<TreeResult> runs;
  int max_extra = 0;
  for (double t : thresholds) {
    runs.push_back(tree_threshold(v, mesh0, degree, t, TreeOptions{40, qdeg, nullptr}));
    max_extra = std::max(max_extra, runs.back().size_after_completion - n0);
  }
  const auto table = sigma_prime_table(v, mesh0, degree, max_extra, qdeg);

  // scale for deciding that everything vanished: the energy of v itself
  double energy = 0.0;
  {
    const QuadRule rule = triangle_rule(qdeg);
    for (int id : mesh0.active_elements())
      energy += integrate_triangle_plain([&](Vec2 p) { return norm2(v.gradient(p)); },
                                         mesh0.triangle(id), rule);
  }
  const double tiny = 1e-8 * std::sqrt(std::max(energy, 1e-300));

  std::vector<NearBestRow> rows;
  for (size_t i = 0; i < thresholds.size(); ++i) {
    NearBestRow row;
    row.threshold = thresholds[i];
    row.mesh_size = runs[i].size_after_completion;
    FeSpace space(runs[i].mesh, degree, BC::neumann);
    row.E = ritz_projection(v, space, qdeg, cg_tol, Exec::par).E;
    row.sigma_prime = table[static_cast<size_t>(row.mesh_size - n0)];
    if (row.sigma_prime <= tiny && row.E <= tiny) {
      row.exact = true;
      row.realized_c1 = 1.0;
    } else {
      row.realized_c1 = row.E / row.sigma_prime;
    }
    rows.push_back(row);
  }
  return rows;
}

double completion_overhead(const std::vector<RefinementRunStats>& runs) {
  double worst = -1.0;
  for (const auto& r : runs) {
    if (r.before_completion <= r.initial_count) continue;  // division guard
    const double ratio = static_cast<double>(r.after_completion - r.initial_count) /
                         static_cast<double>(r.before_completion - r.initial_count);
    worst = std::max(worst, ratio);
  }
  if (worst < 0) throw ConfigError("completion_overhead: no run refined the initial mesh");
  return worst;
}

}  // namespace gradfit
