#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gradfit/fespace.hpp"
#include "gradfit/parallel.hpp"

namespace gradfit {

struct ExperimentConfig {
  std::string function = "sine";
  int degree = 1;
  std::string bc;    // empty: dirichlet0 when the function allows it, else neumann
  std::string mesh;  // empty: the function's default; builtin:... or a file path
  int levels = 4;
  std::vector<double> thresholds;
  std::vector<int> budgets;
  int quad_degree = 0;  // 0: 2*degree + 4
  double cg_tol = 1e-10;
  uint64_t seed = 0;
  Exec exec = Exec::par;
};

// Resolved bc/mesh with validation against the registry.
BC resolve_bc(const ExperimentConfig& cfg);
Mesh resolve_mesh(const ExperimentConfig& cfg);

// Uniform-refinement convergence study.
// CSV: level,h,dofs,elements,E,local_sum,ratio,apriori_seminorm,apriori_bound,eoc
std::string rates_csv(const ExperimentConfig& cfg);

// Local-vs-global error equivalence study.
// CSV: level,h,dofs,elements,local_sum,E,ratio,interp_error,max_delta_k
// Optionally fills one diagnostics JSON record per level.
std::string decouple_csv(const ExperimentConfig& cfg, std::string* json_lines = nullptr);

struct TreeRunOutput {
  std::string jsonl;  // one record per bisection plus a final summary record
  std::string csv;    // t_or_n,elements,dofs,E (+ trailing slope comment)
  bool depth_cap_hit = false;
};
TreeRunOutput tree_run(const ExperimentConfig& cfg);

// Near-best oracle comparison on desk-scale instances.
std::string oracle_json(const ExperimentConfig& cfg);

std::string mesh_info_json(const ExperimentConfig& cfg);

// Ritz solution dump: dof_id,x,y,value (finest level of the config).
std::string solution_dump_csv(const ExperimentConfig& cfg);

}  // namespace gradfit
