// Wall-clock comparison of the OpenMP kernels against the serial reference
// implementations. The results are identical bit-for-bit; this only measures
// time.

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <vector>

#include "gradfit/global_approx.hpp"
#include "gradfit/registry.hpp"

using namespace gradfit;

namespace {

double time_best_of(int reps, const std::function<void()>& fn) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const double t0 = omp_get_wtime();
    fn();
    best = std::min(best, omp_get_wtime() - t0);
  }
  return best;
}

void report(const char* name, double serial, double parallel) {
  std::printf("%-28s %10.4f ms %10.4f ms %8.2fx\n", name, serial * 1e3, parallel * 1e3,
              serial / parallel);
}

}  // namespace

int main(int argc, char** argv) {
  int levels = 11;
  int reps = 5;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--quick") == 0) {
      levels = 5;
      reps = 1;
    }
  }

  Mesh mesh = unit_square_mesh();
  for (int i = 0; i < levels; ++i) uniform_refine(mesh);
  const auto& fn = find_function("atan_layer").fn;
  const int degree = 2;
  const int qdeg = default_quad_degree(degree);

  std::printf("mesh: %d elements, degree %d, %d thread(s)\n", mesh.active_count(), degree,
              omp_get_max_threads());
  std::printf("%-28s %13s %13s %9s\n", "kernel", "serial", "openmp", "speedup");

  // per-element local best-fit error map
  std::vector<double> eps_seq, eps_par;
  const double t_map_seq = time_best_of(
      reps, [&] { eps_seq = element_errors(fn, mesh, degree, qdeg, Exec::seq); });
  const double t_map_par = time_best_of(
      reps, [&] { eps_par = element_errors(fn, mesh, degree, qdeg, Exec::par); });
  report("local error map", t_map_seq, t_map_par);
  if (eps_seq != eps_par) {
    std::printf("MISMATCH in the local error map\n");
    return 1;
  }

  // stiffness assembly
  FeSpace space(mesh, degree, BC::neumann);
  CsrMatrix a_seq, a_par;
  const double t_asm_seq =
      time_best_of(reps, [&] { a_seq = assemble_stiffness(space, Exec::seq); });
  const double t_asm_par =
      time_best_of(reps, [&] { a_par = assemble_stiffness(space, Exec::par); });
  report("stiffness assembly", t_asm_seq, t_asm_par);
  if (a_seq.val != a_par.val || a_seq.col != a_par.col) {
    std::printf("MISMATCH in assembly\n");
    return 1;
  }

  // sparse matrix-vector products
  std::vector<double> x(static_cast<size_t>(a_seq.n)), y(static_cast<size_t>(a_seq.n));
  for (int i = 0; i < a_seq.n; ++i) x[static_cast<size_t>(i)] = std::sin(0.01 * i);
  const int spmv_reps = 200;
  const double t_mv_seq = time_best_of(reps, [&] {
    for (int r = 0; r < spmv_reps; ++r) a_seq.matvec(x, y, Exec::seq);
  });
  const double t_mv_par = time_best_of(reps, [&] {
    for (int r = 0; r < spmv_reps; ++r) a_seq.matvec(x, y, Exec::par);
  });
  report("matvec x200", t_mv_seq, t_mv_par);

  // full projection solve
  RitzResult r_seq, r_par;
  const double t_rz_seq =
      time_best_of(reps, [&] { r_seq = ritz_projection(fn, space, qdeg, 1e-10, Exec::seq); });
  const double t_rz_par =
      time_best_of(reps, [&] { r_par = ritz_projection(fn, space, qdeg, 1e-10, Exec::par); });
  report("ritz projection", t_rz_seq, t_rz_par);
  if (r_seq.E != r_par.E) {
    std::printf("MISMATCH in the projection\n");
    return 1;
  }
  std::printf("serial and parallel results are identical\n");
  return 0;
}
