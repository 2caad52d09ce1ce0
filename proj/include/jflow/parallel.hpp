#pragma once

#include <cstddef>
#include <functional>
#include <span>

#include <Eigen/Core>

namespace jflow {

/// Thread count used by pointwise loops. Set from --threads / JFLOW_THREADS
/// by the CLI; defaults to 1.
int thread_count();
void set_thread_count(int threads);

/// Allocator settings for large short-lived buffers (glibc only; no-op
/// elsewhere). Call once at program start.
void tune_allocator();

/// Runs body(begin, end) over contiguous chunks of [0, size). Chunks are
/// disjoint, so bodies that only write their own indices are race free.
void parallel_for(std::ptrdiff_t size,
                  const std::function<void(std::ptrdiff_t, std::ptrdiff_t)>& body);

/// Pairwise (tree) summation in a fixed order independent of thread count.
double pairwise_sum(std::span<const double> values);

inline double pairwise_sum(const Eigen::VectorXd& v) {
  return pairwise_sum(std::span<const double>(v.data(), static_cast<std::size_t>(v.size())));
}

}  // namespace jflow
