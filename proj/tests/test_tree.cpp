#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "gradfit/errors.hpp"
#include "gradfit/global_approx.hpp"
#include "gradfit/tree.hpp"
#include "helpers.hpp"

using namespace gradfit;

namespace {

TargetFunction bumpy_target() {
  // polynomial plus a quadrature-resolvable bump
  TargetFunction v;
  v.name = "bumpy";
  v.value = [](Vec2 p) {
    return p.x * p.x + std::exp(-(norm2(p - Vec2{0.7, 0.3})) / 0.08);
  };
  v.gradient = [](Vec2 p) {
    const Vec2 d = p - Vec2{0.7, 0.3};
    const double b = std::exp(-norm2(d) / 0.08);
    return Vec2{2.0 * p.x, 0.0} + (-2.0 / 0.08 * b) * d;
  };
  return v;
}

TargetFunction xsq_target() {
  TargetFunction v;
  v.name = "xsq";
  v.value = [](Vec2 p) { return p.x * p.x; };
  v.gradient = [](Vec2 p) { return Vec2{2.0 * p.x, 0.0}; };
  return v;
}

TargetFunction poly1_target() {
  TargetFunction v;
  v.name = "poly1";
  v.value = [](Vec2 p) { return 0.3 * p.x - 1.2 * p.y + 0.7; };
  v.gradient = [](Vec2) { return Vec2{0.3, -1.2}; };
  return v;
}

double harmonic(double a, double b) {
  if (a <= 0 || b <= 0) return 0.0;
  return 1.0 / (1.0 / a + 1.0 / b);
}

}  // namespace

TEST_CASE("threshold run keeps the eta recursion and ordering invariants") {
  const Mesh m0 = unit_square_mesh();
  const auto v = bumpy_target();
  const auto res = tree_threshold(v, m0, 1, 1e-3);
  CHECK(res.mesh.is_conforming());
  CHECK_FALSE(res.depth_cap_hit);

  int internal = 0, leaves = 0;
  for (const auto& [id, info] : res.nodes) {
    if (info.parent >= 0) {
      const auto& parent = res.nodes.at(info.parent);
      CHECK(info.eta ==
            doctest::Approx(harmonic(info.eps, parent.eta)).epsilon(1e-12));
      CHECK(info.eta <= std::min(info.eps, parent.eta) * (1.0 + 1e-12));
      CHECK(info.eta <= parent.eta * (1.0 + 1e-12));
    } else {
      CHECK(info.eta == doctest::Approx(info.eps));
    }
    const auto& e = res.mesh.element(id);
    const bool is_leaf =
        std::find(res.leaves.begin(), res.leaves.end(), id) != res.leaves.end();
    if (is_leaf) {
      CHECK(info.eta <= 1e-3);
      ++leaves;
    } else if (e.children[0] >= 0 && res.nodes.count(e.children[0])) {
      // internal node of the grown tree
      CHECK(info.eta > 1e-3);
      ++internal;
    }
  }
  CHECK(leaves == res.leaves_before_completion);
  CHECK(internal > 0);
}

TEST_CASE("thresholds that nothing exceeds return the initial mesh") {
  const Mesh m0 = unit_square_mesh();
  SUBCASE("polynomial target, eps identically zero") {
    const auto res = tree_threshold(poly1_target(), m0, 1, 1e-12);
    CHECK(res.size_after_completion == m0.active_count());
  }
  SUBCASE("threshold above the maximal eps") {
    const auto v = bumpy_target();
    const QuadRule r = triangle_rule(6);
    double max_eps = 0.0;
    for (int id : m0.active_elements())
      max_eps = std::max(max_eps, epsilon(v, m0.triangle(id), 1, r));
    const auto res = tree_threshold(v, m0, 1, max_eps * 1.0001);
    CHECK(res.size_after_completion == m0.active_count());
  }
}

TEST_CASE("threshold monotonicity: coarser trees are ancestors of finer ones") {
  const Mesh m0 = unit_square_mesh();
  const auto v = bumpy_target();
  const auto coarse = tree_threshold(v, m0, 1, 4e-3);
  const auto fine = tree_threshold(v, m0, 1, 1e-3);
  CHECK(fine.size_after_completion >= coarse.size_after_completion);
  // every fine leaf lies inside exactly one coarse leaf
  for (int lf : fine.leaves) {
    const Tri tf = fine.mesh.triangle(lf);
    const Vec2 c = (tf[0] + tf[1] + tf[2]) / 3.0;
    int container = -1;
    for (int lc : coarse.leaves)
      if (coarse.mesh.triangle(lc).contains(c, 1e-12)) container = lc;
    REQUIRE(container >= 0);
    const Tri tc = coarse.mesh.triangle(container);
    for (int i = 0; i < 3; ++i) CHECK(tc.contains(tf[i], 1e-9));
  }
}

TEST_CASE("broken error identity against the global module") {
  const Mesh m0 = unit_square_mesh();
  const auto v = bumpy_target();
  const auto res = tree_threshold(v, m0, 1, 2e-3);
  double sum = 0.0;
  for (int id : res.leaves) sum += res.nodes.at(id).eps;
  // on the conforming completion of the same leaf set the identity holds
  // exactly when no completion happened
  if (res.size_after_completion == res.leaves_before_completion) {
    const double ls = local_error_sum(v, res.mesh, 1, default_quad_degree(1), Exec::par);
    CHECK(ls * ls == doctest::Approx(sum).epsilon(1e-10));
  }
  // and the trace ends at the leaf-set sum
  REQUIRE_FALSE(res.broken_error_trace.empty());
  CHECK(res.broken_error_trace.back() == doctest::Approx(std::sqrt(sum)).epsilon(1e-10));
}

TEST_CASE("budget variant") {
  const Mesh m0 = unit_square_mesh();
  const auto v = bumpy_target();
  SUBCASE("budget equal to the initial count returns the initial mesh") {
    const auto res = tree_budget(v, m0, 1, m0.active_count());
    CHECK(res.size_after_completion == m0.active_count());
  }
  SUBCASE("budget below the initial count is rejected") {
    CHECK_THROWS_AS(tree_budget(v, m0, 1, 1), ConfigError);
  }
  SUBCASE("stays within budget and decreases the broken error") {
    TreeOptions opts;
    opts.quad_degree = 10;
    for (int budget : {8, 16, 32, 64}) {
      const auto res = tree_budget(v, m0, 1, budget, opts);
      CHECK(res.mesh.is_conforming());
      CHECK(res.size_after_completion <= budget);
      for (size_t i = 1; i < res.broken_error_trace.size(); ++i)
        CHECK(res.broken_error_trace[i] < res.broken_error_trace[i - 1] * (1.0 + 1e-12));
    }
  }
  SUBCASE("head-to-head with uniform refinement on a smooth target") {
    // on smooth targets the greedy mesh is comparable to the uniform one
    TargetFunction sine;
    sine.name = "sine";
    sine.value = [](Vec2 p) { return std::sin(M_PI * p.x) * std::sin(M_PI * p.y); };
    sine.gradient = [](Vec2 p) {
      return Vec2{M_PI * std::cos(M_PI * p.x) * std::sin(M_PI * p.y),
                  M_PI * std::sin(M_PI * p.x) * std::cos(M_PI * p.y)};
    };
    Mesh uniform = unit_square_mesh();
    for (int i = 0; i < 4; ++i) uniform_refine(uniform);  // 32 elements
    const auto run = tree_budget(sine, m0, 1, uniform.active_count());
    const int qdeg = default_quad_degree(1);
    const double adaptive_sum = local_error_sum(sine, run.mesh, 1, qdeg, Exec::par);
    const double uniform_sum = local_error_sum(sine, uniform, 1, qdeg, Exec::par);
    CHECK(run.size_after_completion <= uniform.active_count());
    const double ratio = adaptive_sum * adaptive_sum / (uniform_sum * uniform_sum);
    CHECK(ratio <= 2.0);
    CHECK(ratio >= 0.5);
  }
  SUBCASE("greedy picks the maximal eta first") {
    std::vector<TreeLogEntry> log;
    TreeOptions opts;
    opts.log = &log;
    const auto res = tree_budget(v, m0, 1, 16, opts);
    (void)res;
    REQUIRE(!log.empty());
    // the first bisected element is the root with the larger eps
    const QuadRule r = triangle_rule(6);
    std::map<int, double> root_eps;
    for (int id : m0.active_elements()) root_eps[id] = epsilon(v, m0.triangle(id), 1, r);
    const auto worst =
        std::max_element(root_eps.begin(), root_eps.end(),
                         [](const auto& a, const auto& b) { return a.second < b.second; });
    CHECK(log.front().element == worst->first);
  }
}

TEST_CASE("sigma prime oracle") {
  const Mesh m0 = unit_square_mesh();
  const auto v = xsq_target();
  SUBCASE("n = N0 is the initial broken error") {
    const auto res = sigma_prime(v, m0, 1, 2);
    const QuadRule r = triangle_rule(6);
    double sum = 0.0;
    for (int id : m0.active_elements()) sum += epsilon(v, m0.triangle(id), 1, r);
    CHECK(res.value == doctest::Approx(std::sqrt(sum)).epsilon(1e-12));
  }
  SUBCASE("non-increasing in n") {
    double prev = std::numeric_limits<double>::infinity();
    for (int n = 2; n <= 8; ++n) {
      const double val = sigma_prime(v, m0, 1, n).value;
      CHECK(val <= prev * (1.0 + 1e-12));
      prev = val;
    }
  }
  SUBCASE("enumeration budget is enforced") {
    CHECK_THROWS_AS(sigma_prime(v, m0, 1, m0.active_count() + 13), ConfigError);
  }
  SUBCASE("matches an independent breadth-first enumeration at n = 4") {
    // independent oracle: BFS over leaf multisets with memoized eps
    const QuadRule r = triangle_rule(6);
    Mesh scratch = m0;
    std::map<int, double> eps;
    std::map<int, std::pair<int, int>> kids;
    const std::function<double(int)> eps_of = [&](int id) {
      if (!eps.count(id)) eps[id] = epsilon(v, scratch.triangle(id), 1, r);
      return eps.at(id);
    };
    const auto kids_of = [&](int id) {
      if (!kids.count(id)) kids[id] = scratch.bisect(id);
      return kids.at(id);
    };
    std::set<std::vector<int>> seen;
    std::vector<std::vector<int>> frontier{{0, 1}};
    seen.insert({0, 1});
    double best = std::numeric_limits<double>::infinity();
    while (!frontier.empty()) {
      std::vector<std::vector<int>> next;
      for (const auto& state : frontier) {
        double sum = 0.0;
        for (int id : state) sum += eps_of(id);
        best = std::min(best, sum);
        if (state.size() >= 4) continue;
        for (size_t i = 0; i < state.size(); ++i) {
          auto [c1, c2] = kids_of(state[i]);
          std::vector<int> child_state = state;
          child_state[i] = c1;
          child_state.push_back(c2);
          std::sort(child_state.begin(), child_state.end());
          if (seen.insert(child_state).second) next.push_back(child_state);
        }
      }
      frontier = std::move(next);
    }
    const auto res = sigma_prime(v, m0, 1, 4);
    CHECK(res.value == doctest::Approx(std::sqrt(best)).epsilon(1e-12));
    CHECK(res.optimal_leaf_count <= 4);
    REQUIRE(res.optimal_leaves.size() == static_cast<size_t>(res.optimal_leaf_count));
    // the optimal leaves tile the domain and their eps values reproduce sigma'
    double area = 0.0, sum = 0.0;
    for (const Tri& t : res.optimal_leaves) area += t.area();
    for (double e : res.optimal_leaf_eps) sum += e;
    CHECK(area == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::sqrt(sum) == doctest::Approx(res.value).epsilon(1e-12));
  }
  SUBCASE("budget output error is never below the oracle") {
    const auto vb = bumpy_target();
    for (int n : {4, 6, 8}) {
      const auto run = tree_budget(vb, m0, 1, n);
      double run_sum = 0.0;
      for (int id : run.leaves) run_sum += run.nodes.at(id).eps;
      const double oracle = sigma_prime(vb, m0, 1, run.leaves_before_completion).value;
      CHECK(std::sqrt(run_sum) >= oracle * (1.0 - 1e-10));
    }
  }
}

TEST_CASE("near-best report") {
  const Mesh m0 = unit_square_mesh();
  SUBCASE("member targets report exact") {
    const auto rows = near_best_report(poly1_target(), m0, 1, {1e-6});
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].exact);
  }
  SUBCASE("ratios are at least one and moderate on a bump target") {
    const auto v = bumpy_target();
    // thresholds scaled off the initial indicators so the trees stay within
    // the oracle's enumeration budget
    const QuadRule r = triangle_rule(6);
    double max_eps = 0.0;
    for (int id : m0.active_elements())
      max_eps = std::max(max_eps, epsilon(v, m0.triangle(id), 1, r));
    const auto rows = near_best_report(v, m0, 1, {0.6 * max_eps, 0.25 * max_eps});
    for (const auto& row : rows) {
      CHECK(row.realized_c1 >= 1.0 - 1e-6);
      CHECK(row.realized_c1 <= 5.0);
      CHECK(row.E >= row.sigma_prime * (1.0 - 1e-9));
    }
  }
}

TEST_CASE("completion overhead") {
  SUBCASE("conforming refinement has ratio one") {
    Mesh m = unit_square_mesh();
    const int n0 = m.active_count();
    m.bisect(0);
    m.bisect(1);  // conforming again
    const int before = m.active_count();
    m.complete();
    CHECK(completion_overhead({{n0, before, m.active_count()}}) == doctest::Approx(1.0));
  }
  SUBCASE("single bisection of the square has ratio two") {
    Mesh m = unit_square_mesh();
    const int n0 = m.active_count();
    m.bisect(0);
    const int before = m.active_count();
    m.complete();
    CHECK(completion_overhead({{n0, before, m.active_count()}}) == doctest::Approx(2.0));
  }
  SUBCASE("division guard") {
    CHECK_THROWS_AS(completion_overhead({{2, 2, 2}}), ConfigError);
  }
  SUBCASE("randomized stress stays finite and stable across seeds") {
    std::vector<double> fitted;
    for (unsigned seed : {1u, 2u, 3u}) {
      std::mt19937_64 rng(seed);
      Mesh m = unit_square_mesh();
      const int n0 = m.active_count();
      for (int i = 0; i < 500; ++i) {
        const auto act = m.active_elements();
        m.bisect(act[rng() % act.size()]);
      }
      const int before = m.active_count();
      m.complete();
      fitted.push_back(completion_overhead({{n0, before, m.active_count()}}));
    }
    for (double f : fitted) {
      CHECK(std::isfinite(f));
      CHECK(f >= 1.0);
    }
    const auto [lo, hi] = std::minmax_element(fitted.begin(), fitted.end());
    CHECK(*hi / *lo <= 1.5);
  }
}
