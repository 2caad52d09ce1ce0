#include "jflow/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <thread>
#include <vector>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

namespace jflow {

namespace {
std::atomic<int> g_threads{1};
}

void tune_allocator() {
#if defined(__GLIBC__)
  // Field buffers are a few hundred KB and short lived; keep them on the heap
  // instead of paying an mmap and page faults per allocation.
  mallopt(M_MMAP_THRESHOLD, 256 << 20);
  mallopt(M_TRIM_THRESHOLD, 512 << 20);
  mallopt(M_TOP_PAD, 64 << 20);
#endif
}

int thread_count() { return g_threads.load(std::memory_order_relaxed); }

void set_thread_count(int threads) {
  g_threads.store(std::max(1, threads), std::memory_order_relaxed);
}

void parallel_for(std::ptrdiff_t size,
                  const std::function<void(std::ptrdiff_t, std::ptrdiff_t)>& body) {
  const std::ptrdiff_t threads =
      std::min<std::ptrdiff_t>(thread_count(), std::max<std::ptrdiff_t>(1, size / 256));
  if (threads <= 1) {
    body(0, size);
    return;
  }
  std::vector<std::jthread> workers;
  workers.reserve(static_cast<std::size_t>(threads - 1));
  const std::ptrdiff_t chunk = (size + threads - 1) / threads;
  for (std::ptrdiff_t t = 1; t < threads; ++t) {
    const std::ptrdiff_t b = t * chunk;
    const std::ptrdiff_t e = std::min(size, b + chunk);
    if (b < e) workers.emplace_back([&body, b, e] { body(b, e); });
  }
  body(0, std::min(size, chunk));
}

double pairwise_sum(std::span<const double> values) {
  constexpr std::size_t kLeaf = 32;
  if (values.size() <= kLeaf) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

}  // namespace jflow
