#include "gradfit/parallel.hpp"

#include <vector>

namespace gradfit {

double det_dot(std::span<const double> a, std::span<const double> b, Exec exec) {
  constexpr size_t kBlock = 1024;
  const size_t n = a.size();
  const size_t nblocks = (n + kBlock - 1) / kBlock;
  std::vector<double> partial(nblocks, 0.0);
  parallel_for(
      static_cast<int>(nblocks), exec,
      [&](int bi) {
        const size_t lo = static_cast<size_t>(bi) * kBlock;
        const size_t hi = lo + kBlock < n ? lo + kBlock : n;
        double s = 0.0;
        for (size_t i = lo; i < hi; ++i) s += a[i] * b[i];
        partial[static_cast<size_t>(bi)] = s;
      },
      32);  // blocks are light; fork only for long vectors
  double s = 0.0;
  for (double p : partial) s += p;
  return s;
}

double ordered_sum(std::span<const double> a) {
  double s = 0.0;
  for (double x : a) s += x;
  return s;
}

}  // namespace gradfit
