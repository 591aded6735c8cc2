#pragma once

#include <limits>
#include <unordered_map>
#include <vector>

#include "gradfit/fespace.hpp"
#include "gradfit/local_approx.hpp"

namespace gradfit {

struct TreeNodeInfo {
  double eps = -1.0;
  double eta = -1.0;
  int parent = -1;
};

// One record per bisection performed by the growing phase.
struct TreeLogEntry {
  int step = 0;
  int element = 0;  // the element that was bisected
  double eps = 0.0;
  double eta = 0.0;
  int leaf_count = 0;
};

struct TreeOptions {
  int depth_cap = 40;    // generations; growth stops there and is reported
  int quad_degree = 0;   // 0: default for the polynomial degree
  std::vector<TreeLogEntry>* log = nullptr;
};

struct TreeResult {
  Mesh mesh;  // completed conforming output
  std::unordered_map<int, TreeNodeInfo> nodes;
  std::vector<int> leaves;            // leaf set before completion
  int leaves_before_completion = 0;
  int size_after_completion = 0;
  bool depth_cap_hit = false;
  std::vector<double> broken_error_trace;  // sqrt(sum eps) after each bisection
};

// Threshold variant: roots seeded with eta = eps, grown while eta > t,
// output completed to conformity.
TreeResult tree_threshold(const TargetFunction& v, const Mesh& mesh0, int degree, double t,
                          const TreeOptions& opts = {});

// Greedy variant: repeatedly bisects the leaf with maximal eta (ties by
// lowest element id) while the completion of the current leaf set still
// fits the budget.
TreeResult tree_budget(const TargetFunction& v, const Mesh& mesh0, int degree, int budget,
                       const TreeOptions& opts = {});

struct SigmaPrimeResult {
  int n = 0;
  double value = 0.0;
  std::vector<Tri> optimal_leaves;       // the minimizing leaf set
  std::vector<double> optimal_leaf_eps;  // its eps values
  int optimal_leaf_count = 0;
};

// Best broken error over all bisection subtrees (conforming or not) with at
// most `n` leaves, by exhaustive enumeration. n - #M0 <= 12.
SigmaPrimeResult sigma_prime(const TargetFunction& v, const Mesh& mesh0, int degree, int n,
                             int quad_degree = 0);

// sigma'(v, N0 + k) for k = 0..max_extra in one enumeration pass.
std::vector<double> sigma_prime_table(const TargetFunction& v, const Mesh& mesh0, int degree,
                                      int max_extra, int quad_degree = 0);

struct NearBestRow {
  double threshold = 0.0;
  int mesh_size = 0;
  double E = 0.0;
  double sigma_prime = 0.0;
  double realized_c1 = 0.0;
  bool exact = false;  // all errors vanish
};

// Per threshold: the tree run, the global best error on its output, and the
// oracle value at matched cardinality.
std::vector<NearBestRow> near_best_report(const TargetFunction& v, const Mesh& mesh0,
                                          int degree, const std::vector<double>& thresholds,
                                          double cg_tol = 1e-10, int quad_degree = 0);

struct RefinementRunStats {
  int initial_count = 0;
  int before_completion = 0;
  int after_completion = 0;
};

// max over runs of (#complete(M') - #M0) / (#M' - #M0).
double completion_overhead(const std::vector<RefinementRunStats>& runs);

}  // namespace gradfit
