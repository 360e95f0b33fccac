#include "melm/runtime.hpp"

#include <omp.h>

#include <atomic>

#include "melm/error.hpp"

namespace melm {

namespace {
std::atomic<int> g_thread_cap{0};
}  // namespace

void set_max_threads(int n) {
  if (n < 0) throw ConfigError("thread cap must be >= 0 (0 means all cores)");
  g_thread_cap.store(n, std::memory_order_relaxed);
}

int max_threads() {
  const int cap = g_thread_cap.load(std::memory_order_relaxed);
  if (cap > 0) return cap;
  const int hw = omp_get_max_threads();
  return hw > 0 ? hw : 1;
}

}  // namespace melm
