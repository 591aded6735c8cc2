#pragma once

#include <cstddef>
#include <span>

namespace gradfit {

// Every data-parallel kernel takes an execution policy; `seq` is the serial
// reference implementation the tests compare against. Results are identical
// bit-for-bit: parallel maps write to indexed slots and reductions use a
// fixed block decomposition independent of the thread count.
enum class Exec { seq, par };

// Below this many iterations a light (streaming) loop is not worth a fork;
// heavy per-element loops pass min_parallel = 1.
inline constexpr int kLightKernelGrain = 65536;

template <typename Fn>
void parallel_for(int n, Exec exec, Fn&& fn, int min_parallel = 1) {
  if (exec == Exec::seq || n < min_parallel) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
#pragma omp parallel for schedule(dynamic, 8)
  for (int i = 0; i < n; ++i) fn(i);
}

// Deterministic dot product: fixed 1024-element blocks summed serially.
double det_dot(std::span<const double> a, std::span<const double> b, Exec exec);

// Ordered sum of a vector (serial by construction; kept for symmetry).
double ordered_sum(std::span<const double> a);

}  // namespace gradfit
