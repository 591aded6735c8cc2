#include "gradfit/sparse.hpp"

#include <cmath>

#include "gradfit/errors.hpp"

namespace gradfit {

void CsrMatrix::matvec(std::span<const double> x, std::span<double> y, Exec exec) const {
  parallel_for(
      n, exec,
      [&](int r) {
        double s = 0.0;
        for (int k = row_ptr[static_cast<size_t>(r)]; k < row_ptr[static_cast<size_t>(r) + 1]; ++k)
          s += val[static_cast<size_t>(k)] * x[static_cast<size_t>(col[static_cast<size_t>(k)])];
        y[static_cast<size_t>(r)] = s;
      },
      kLightKernelGrain);
}

std::vector<double> CsrMatrix::diagonal() const {
  std::vector<double> d(static_cast<size_t>(n), 0.0);
  for (int r = 0; r < n; ++r)
    for (int k = row_ptr[static_cast<size_t>(r)]; k < row_ptr[static_cast<size_t>(r) + 1]; ++k)
      if (col[static_cast<size_t>(k)] == r) d[static_cast<size_t>(r)] = val[static_cast<size_t>(k)];
  return d;
}

double CsrMatrix::energy(std::span<const double> x, Exec exec) const {
  std::vector<double> y(static_cast<size_t>(n));
  matvec(x, y, exec);
  return det_dot(x, y, exec);
}

namespace {

void remove_mean(std::span<double> v) {
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  for (double& x : v) x -= m;
}

}  // namespace

CgResult pcg(const CsrMatrix& A, std::span<const double> b, double tol, int max_iter,
             Exec exec, bool deflate_constants) {
  const size_t n = static_cast<size_t>(A.n);
  CgResult res;
  res.x.assign(n, 0.0);
  if (n == 0) {
    res.converged = true;
    return res;
  }

  std::vector<double> r(b.begin(), b.end());
  if (deflate_constants) remove_mean(r);
  const double bnorm = std::sqrt(det_dot(r, r, exec));
  if (bnorm == 0.0) {
    res.converged = true;
    return res;
  }

  std::vector<double> diag = A.diagonal();
  std::vector<double> inv_diag(n);
  for (size_t i = 0; i < n; ++i)
    inv_diag[i] = diag[i] > 0.0 ? 1.0 / diag[i] : 1.0;

  std::vector<double> z(n), p(n), Ap(n);
  parallel_for(A.n, exec, [&](int i) { z[static_cast<size_t>(i)] = inv_diag[static_cast<size_t>(i)] * r[static_cast<size_t>(i)]; }, kLightKernelGrain);
  if (deflate_constants) remove_mean(z);
  p = z;
  double rz = det_dot(r, z, exec);

  for (int it = 1; it <= max_iter; ++it) {
    A.matvec(p, Ap, exec);
    if (deflate_constants) remove_mean(Ap);
    const double pAp = det_dot(p, Ap, exec);
    if (!(pAp > 0)) throw NumericalError("pcg: operator not positive definite on the search space");
    const double alpha = rz / pAp;
    parallel_for(
        A.n, exec,
        [&](int i) {
          res.x[static_cast<size_t>(i)] += alpha * p[static_cast<size_t>(i)];
          r[static_cast<size_t>(i)] -= alpha * Ap[static_cast<size_t>(i)];
        },
        kLightKernelGrain);
    const double rnorm = std::sqrt(det_dot(r, r, exec));
    res.iterations = it;
    res.residual = rnorm / bnorm;
    if (res.residual <= tol) {
      res.converged = true;
      return res;
    }
    parallel_for(A.n, exec, [&](int i) { z[static_cast<size_t>(i)] = inv_diag[static_cast<size_t>(i)] * r[static_cast<size_t>(i)]; }, kLightKernelGrain);
    if (deflate_constants) remove_mean(z);
    const double rz_new = det_dot(r, z, exec);
    const double beta = rz_new / rz;
    rz = rz_new;
    parallel_for(A.n, exec, [&](int i) { p[static_cast<size_t>(i)] = z[static_cast<size_t>(i)] + beta * p[static_cast<size_t>(i)]; }, kLightKernelGrain);
  }
  throw NumericalError("pcg: no convergence within the iteration cap (residual " +
                       std::to_string(res.residual) + ")");
}

}  // namespace gradfit
