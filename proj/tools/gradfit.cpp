#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include "gradfit/errors.hpp"
#include "gradfit/experiments.hpp"
#include "gradfit/registry.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

void write_output(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    return;
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) throw gradfit::ConfigError("cannot open output file: " + path);
  os << content;
}

std::string function_list() {
  std::string s;
  for (const auto& [name, e] : gradfit::registry()) {
    (void)e;
    if (!s.empty()) s += ", ";
    s += name;
  }
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "gradfit: gradient approximation by continuous piecewise polynomials.\n"
      "Local/global best-error studies and adaptive tree refinement on 2D\n"
      "bisection meshes."};
  app.require_subcommand(1);

  gradfit::ExperimentConfig cfg;
  std::string out_path, json_path, dump_path;
  bool serial = false;

  const auto add_common = [&](CLI::App* sub, bool with_levels) {
    sub->add_option("--function", cfg.function,
                    "target function; one of: " + function_list())
        ->capture_default_str();
    sub->add_option("--degree", cfg.degree, "polynomial degree l in 1..4")
        ->capture_default_str();
    sub->add_option("--bc", cfg.bc, "boundary condition: dirichlet0 | neumann");
    sub->add_option("--mesh", cfg.mesh,
                    "initial mesh: builtin:unit-square | builtin:l-shape | file path");
    if (with_levels)
      sub->add_option("--levels", cfg.levels, "number of uniform refinement levels")
          ->capture_default_str();
    sub->add_option("--quad-degree", cfg.quad_degree,
                    "volume quadrature degree override (default 2*degree+4)");
    sub->add_option("--cg-tol", cfg.cg_tol, "relative CG residual tolerance")
        ->capture_default_str();
    sub->add_option("--out", out_path, "output file (default: stdout)");
    sub->add_option("--seed", cfg.seed, "seed echoed into reproducibility metadata");
    sub->add_flag("--serial", serial, "run the serial reference kernels");
  };

  auto* rates = app.add_subcommand(
      "rates",
      "uniform-refinement convergence study.\n"
      "CSV columns: level,h,dofs,elements,E,local_sum,ratio,apriori_seminorm,"
      "apriori_bound,eoc");
  add_common(rates, true);

  auto* decouple = app.add_subcommand(
      "decouple",
      "local-vs-global best error equivalence study.\n"
      "CSV columns: level,h,dofs,elements,local_sum,E,ratio,interp_error,max_delta_k");
  add_common(decouple, true);
  decouple->add_option("--json-out", json_path, "also write diagnostics JSON lines");
  decouple->add_option("--dump-solution", dump_path,
                       "write the finest-level Ritz solution as dof_id,x,y,value");

  auto* tree = app.add_subcommand(
      "tree",
      "adaptive tree approximation.\n"
      "CSV columns: t_or_n,elements,dofs,E (trailing comment: loglog slope);\n"
      "JSON lines: one record per bisection {step,element,eps,eta,leaf_count}");
  add_common(tree, false);
  tree->add_option("--thresholds", cfg.thresholds, "threshold schedule (comma separated)")
      ->delimiter(',');
  tree->add_option("--budget", cfg.budgets, "element budget schedule (comma separated)")
      ->delimiter(',');
  tree->add_option("--json-out", json_path, "write the run log as JSON lines");

  auto* oracle = app.add_subcommand(
      "oracle",
      "near-best comparison against the exhaustive subtree oracle (small runs)");
  add_common(oracle, false);
  oracle->add_option("--thresholds", cfg.thresholds, "threshold schedule (comma separated)")
      ->delimiter(',');

  auto* info = app.add_subcommand("mesh-info", "mesh statistics as JSON");
  info->add_option("--mesh", cfg.mesh,
                   "mesh: builtin:unit-square | builtin:l-shape | file path");
  info->add_option("--levels", cfg.levels, "uniform refinements before reporting")
      ->capture_default_str();
  info->add_option("--out", out_path, "output file (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  cfg.exec = serial ? gradfit::Exec::seq : gradfit::Exec::par;
  if (info->parsed() && !info->count("--levels")) cfg.levels = 0;

  try {
    if (rates->parsed()) {
      write_output(out_path, gradfit::rates_csv(cfg));
    } else if (decouple->parsed()) {
      std::string json_lines;
      const std::string csv =
          gradfit::decouple_csv(cfg, json_path.empty() ? nullptr : &json_lines);
      write_output(out_path, csv);
      if (!json_path.empty()) write_output(json_path, json_lines);
      if (!dump_path.empty()) write_output(dump_path, gradfit::solution_dump_csv(cfg));
    } else if (tree->parsed()) {
      const auto run = gradfit::tree_run(cfg);
      write_output(out_path, run.csv);
      if (!json_path.empty()) write_output(json_path, run.jsonl);
      if (run.depth_cap_hit) {
        std::cerr << "tree: depth cap hit; result is partial\n";
        return kExitNumerical;
      }
    } else if (oracle->parsed()) {
      write_output(out_path, gradfit::oracle_json(cfg));
    } else if (info->parsed()) {
      write_output(out_path, gradfit::mesh_info_json(cfg));
    }
  } catch (const gradfit::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const gradfit::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return 0;
}
