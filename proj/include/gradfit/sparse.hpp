#pragma once

#include <span>
#include <vector>

#include "gradfit/parallel.hpp"

namespace gradfit {

struct CsrMatrix {
  int n = 0;
  std::vector<int> row_ptr;  // n+1
  std::vector<int> col;
  std::vector<double> val;

  void matvec(std::span<const double> x, std::span<double> y, Exec exec) const;
  std::vector<double> diagonal() const;
  // x^T A x
  double energy(std::span<const double> x, Exec exec) const;
};

struct CgResult {
  std::vector<double> x;
  int iterations = 0;
  double residual = 0.0;  // relative to |b|
  bool converged = false;
};

// Jacobi-preconditioned conjugate gradients. With deflate_constants the
// iterates are kept orthogonal to the all-ones vector (singular consistent
// Neumann systems).
CgResult pcg(const CsrMatrix& A, std::span<const double> b, double tol, int max_iter,
             Exec exec, bool deflate_constants);

}  // namespace gradfit
