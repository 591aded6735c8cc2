#include "gradfit/experiments.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "gradfit/errors.hpp"
#include "gradfit/global_approx.hpp"
#include "gradfit/registry.hpp"
#include "gradfit/tree.hpp"

namespace gradfit {

namespace {

std::string g17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

int qdeg_of(const ExperimentConfig& cfg) {
  if (cfg.quad_degree < 0 || cfg.quad_degree > 20)
    throw ConfigError("quad degree out of range");
  return cfg.quad_degree > 0 ? cfg.quad_degree : default_quad_degree(cfg.degree);
}

void check_degree(const ExperimentConfig& cfg) {
  if (cfg.degree < 1 || cfg.degree > 4) throw ConfigError("degree must be in 1..4");
}

// log-log least-squares slope of y against x
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0) || !(y[i] > 0)) continue;
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++n;
  }
  if (n < 2) return 0.0;
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

double max_h(const Mesh& m) {
  double h = 0.0;
  for (int id : m.active_elements()) h = std::max(h, m.triangle(id).diameter());
  return h;
}

}  // namespace

BC resolve_bc(const ExperimentConfig& cfg) {
  const auto& entry = find_function(cfg.function);
  if (cfg.bc.empty()) return entry.dirichlet0_ok ? BC::dirichlet0 : BC::neumann;
  const BC bc = bc_from_string(cfg.bc);
  if (bc == BC::dirichlet0 && !entry.dirichlet0_ok)
    throw ConfigError("function '" + cfg.function + "' is not dirichlet0-compatible");
  return bc;
}

Mesh resolve_mesh(const ExperimentConfig& cfg) {
  const auto& entry = find_function(cfg.function);
  const std::string spec = cfg.mesh.empty() ? entry.default_mesh : cfg.mesh;
  if (cfg.function == "lshape" && spec != "builtin:l-shape" && spec != "l-shape")
    throw ConfigError("function 'lshape' is only defined on the l-shape domain");
  return mesh_from_spec(spec);
}

std::string rates_csv(const ExperimentConfig& cfg) {
  check_degree(cfg);
  const auto& entry = find_function(cfg.function);
  const BC bc = resolve_bc(cfg);
  Mesh mesh = resolve_mesh(cfg);
  const int qdeg = qdeg_of(cfg);
  const int s = std::min(cfg.degree + 1, entry.fn.max_deriv_order);
  const bool have_deriv = static_cast<bool>(entry.fn.deriv) && s >= 1;

  std::ostringstream os;
  os << "level,h,dofs,elements,E,local_sum,ratio,apriori_seminorm,apriori_bound,eoc\n";
  double prev_e = 0.0, prev_h = 0.0;
  for (int level = 1; level <= cfg.levels; ++level) {
    uniform_refine(mesh);
    FeSpace space(mesh, cfg.degree, bc);
    const auto d = decoupling_ratio(entry.fn, space, qdeg, cfg.cg_tol, cfg.exec);
    const double h = max_h(mesh);

    std::string apr_sum = "", apr_bound = "";
    if (have_deriv && d.kind == DecouplingResult::Kind::finite) {
      const auto a = apriori_bound(entry.fn, mesh, cfg.degree, s, d.ratio, qdeg, cfg.exec);
      apr_sum = g17(a.seminorm_sum);
      apr_bound = g17(a.bound);
    }
    std::string ratio = d.kind == DecouplingResult::Kind::finite
                            ? g17(d.ratio)
                            : (d.kind == DecouplingResult::Kind::member ? "member" : "inf");
    std::string eoc = "";
    if (level > 1 && prev_e > 0 && d.E > 0)
      eoc = g17(std::log(prev_e / d.E) / std::log(prev_h / h));
    os << level << "," << g17(h) << "," << space.dof_count() << "," << mesh.active_count()
       << "," << g17(d.E) << "," << g17(d.local_sum) << "," << ratio << "," << apr_sum << ","
       << apr_bound << "," << eoc << "\n";
    prev_e = d.E;
    prev_h = h;
  }
  return os.str();
}

std::string decouple_csv(const ExperimentConfig& cfg, std::string* json_lines) {
  check_degree(cfg);
  const auto& entry = find_function(cfg.function);
  const BC bc = resolve_bc(cfg);
  Mesh mesh = resolve_mesh(cfg);
  const int qdeg = qdeg_of(cfg);

  std::ostringstream os, js;
  os << "level,h,dofs,elements,local_sum,E,ratio,interp_error,max_delta_k\n";
  for (int level = 1; level <= cfg.levels; ++level) {
    uniform_refine(mesh);
    FeSpace space(mesh, cfg.degree, bc);
    const auto d = decoupling_ratio(entry.fn, space, qdeg, cfg.cg_tol, cfg.exec);
    const auto pi = interpolate(entry.fn, space, qdeg);
    const double pi_err = h1_seminorm_error(entry.fn, space, pi, qdeg, cfg.exec);
    double max_dk = 0.0;
    for (int id : mesh.active_elements())
      max_dk = std::max(max_dk,
                        delta_k_bound(mesh, id, cfg.degree, space.constrained_flags(id)));
    const std::string ratio = d.kind == DecouplingResult::Kind::finite
                                  ? g17(d.ratio)
                                  : (d.kind == DecouplingResult::Kind::member ? "member" : "inf");
    os << level << "," << g17(max_h(mesh)) << "," << space.dof_count() << ","
       << mesh.active_count() << "," << g17(d.local_sum) << "," << g17(d.E) << "," << ratio
       << "," << g17(pi_err) << "," << g17(max_dk) << "\n";
    if (json_lines) {
      nlohmann::ordered_json rec;
      rec["schema"] = "gradfit/v1";
      rec["level"] = level;
      rec["E"] = d.E;
      rec["local_sum"] = d.local_sum;
      if (d.kind == DecouplingResult::Kind::finite)
        rec["ratio"] = d.ratio;
      else
        rec["ratio"] = d.kind == DecouplingResult::Kind::member ? "member" : "inf";
      rec["interp_error"] = pi_err;
      rec["dofs"] = space.dof_count();
      rec["elements"] = mesh.active_count();
      js << rec.dump() << "\n";
    }
  }
  if (json_lines) *json_lines = js.str();
  return os.str();
}

TreeRunOutput tree_run(const ExperimentConfig& cfg) {
  check_degree(cfg);
  const auto& entry = find_function(cfg.function);
  const Mesh mesh0 = resolve_mesh(cfg);
  const int qdeg = qdeg_of(cfg);
  if (cfg.thresholds.empty() == cfg.budgets.empty())
    throw ConfigError("tree: provide either --thresholds or --budget");

  TreeRunOutput out;
  std::ostringstream csv, jsonl;
  csv << "t_or_n,elements,dofs,E\n";
  std::vector<double> sizes, errors;

  const auto emit = [&](double t_or_n, const TreeResult& res,
                        const std::vector<TreeLogEntry>& log) {
    for (const auto& e : log) {
      nlohmann::ordered_json rec;
      rec["schema"] = "gradfit/v1";
      rec["step"] = e.step;
      rec["element"] = e.element;
      rec["eps"] = e.eps;
      rec["eta"] = e.eta;
      rec["leaf_count"] = e.leaf_count;
      jsonl << rec.dump() << "\n";
    }
    FeSpace space(res.mesh, cfg.degree, BC::neumann);
    const auto ritz = ritz_projection(entry.fn, space, qdeg, cfg.cg_tol, cfg.exec);
    nlohmann::ordered_json fin;
    fin["schema"] = "gradfit/v1";
    fin["threshold_or_budget"] = t_or_n;
    fin["elements"] = res.size_after_completion;
    fin["E"] = ritz.E;
    if (res.size_after_completion - mesh0.active_count() <= 12) {
      const auto oracle =
          sigma_prime(entry.fn, mesh0, cfg.degree, res.size_after_completion, qdeg);
      fin["sigma_prime"] = oracle.value;
      if (oracle.value > 0) fin["C1_realized"] = ritz.E / oracle.value;
    }
    if (res.depth_cap_hit) fin["depth_cap_hit"] = true;
    jsonl << fin.dump() << "\n";
    csv << g17(t_or_n) << "," << res.size_after_completion << "," << space.dof_count() << ","
        << g17(ritz.E) << "\n";
    sizes.push_back(res.size_after_completion);
    errors.push_back(ritz.E);
    out.depth_cap_hit = out.depth_cap_hit || res.depth_cap_hit;
  };

  TreeOptions opts;
  opts.quad_degree = qdeg;
  for (double t : cfg.thresholds) {
    std::vector<TreeLogEntry> log;
    opts.log = &log;
    emit(t, tree_threshold(entry.fn, mesh0, cfg.degree, t, opts), log);
  }
  for (int n : cfg.budgets) {
    std::vector<TreeLogEntry> log;
    opts.log = &log;
    emit(static_cast<double>(n), tree_budget(entry.fn, mesh0, cfg.degree, n, opts), log);
  }

  const double slope = loglog_slope(sizes, errors);
  csv << "# loglog_slope," << g17(slope) << "\n";
  nlohmann::ordered_json sl;
  sl["schema"] = "gradfit/v1";
  sl["loglog_slope"] = slope;
  jsonl << sl.dump() << "\n";
  out.csv = csv.str();
  out.jsonl = jsonl.str();
  return out;
}

std::string oracle_json(const ExperimentConfig& cfg) {
  check_degree(cfg);
  const auto& entry = find_function(cfg.function);
  const Mesh mesh0 = resolve_mesh(cfg);
  if (cfg.thresholds.empty()) throw ConfigError("oracle: provide --thresholds");
  const auto rows =
      near_best_report(entry.fn, mesh0, cfg.degree, cfg.thresholds, cfg.cg_tol, qdeg_of(cfg));
  nlohmann::ordered_json out;
  out["schema"] = "gradfit/v1";
  out["function"] = cfg.function;
  out["degree"] = cfg.degree;
  out["rows"] = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    nlohmann::ordered_json rec;
    rec["threshold"] = r.threshold;
    rec["elements"] = r.mesh_size;
    rec["E"] = r.E;
    rec["sigma_prime"] = r.sigma_prime;
    if (r.exact)
      rec["C1_realized"] = "exact";
    else
      rec["C1_realized"] = r.realized_c1;
    out["rows"].push_back(rec);
  }
  return out.dump(2) + "\n";
}

std::string mesh_info_json(const ExperimentConfig& cfg) {
  Mesh mesh = cfg.mesh.empty() ? unit_square_mesh() : mesh_from_spec(cfg.mesh);
  for (int i = 0; i < cfg.levels; ++i) uniform_refine(mesh);
  nlohmann::ordered_json out;
  out["schema"] = "gradfit/v1";
  out["vertices"] = mesh.vertex_count();
  out["elements"] = mesh.active_count();
  out["initial_elements"] = mesh.initial_count();
  out["conforming"] = mesh.is_conforming();
  out["area"] = mesh.total_area();
  out["max_shape_coefficient"] = mesh.max_shape_coefficient();
  out["max_generation"] = mesh.max_generation();
  return out.dump(2) + "\n";
}

std::string solution_dump_csv(const ExperimentConfig& cfg) {
  check_degree(cfg);
  const auto& entry = find_function(cfg.function);
  const BC bc = resolve_bc(cfg);
  Mesh mesh = resolve_mesh(cfg);
  for (int level = 0; level < cfg.levels; ++level) uniform_refine(mesh);
  FeSpace space(mesh, cfg.degree, bc);
  const auto ritz = ritz_projection(entry.fn, space, qdeg_of(cfg), cfg.cg_tol, cfg.exec);
  std::ostringstream os;
  os << "dof_id,x,y,value\n";
  for (int i = 0; i < space.node_count(); ++i) {
    const auto& n = space.node(i);
    if (n.dof < 0) continue;
    os << n.dof << "," << g17(n.xy.x) << "," << g17(n.xy.y) << ","
       << g17(ritz.nodal[static_cast<size_t>(i)]) << "\n";
  }
  return os.str();
}

}  // namespace gradfit
