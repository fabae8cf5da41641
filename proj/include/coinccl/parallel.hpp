#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace coinccl {

/// worker count: COINCCL_THREADS if set, else hardware concurrency
inline unsigned thread_budget() {
  if (const char* env = std::getenv("COINCCL_THREADS")) {
    long n = std::strtol(env, nullptr, 10);
    if (n >= 1)
      return static_cast<unsigned>(n > 256 ? 256 : n);
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw ? hw : 1;
}

// Runs fn(i) for i in [0, n). Work items must be independent; results
// must not depend on execution order.
template <typename F>
void parallel_for(std::size_t n, F&& fn) {
  const unsigned workers = thread_budget();
  if (workers <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i)
      fn(i);
    return;
  }
  std::exception_ptr first_error;
  std::vector<std::thread> pool;
  const std::size_t stride = (n + workers - 1) / workers;
  std::mutex guard;
  for (unsigned w = 0; w < workers; ++w) {
    const std::size_t lo = w * stride;
    if (lo >= n)
      break;
    const std::size_t hi = std::min(n, lo + stride);
    pool.emplace_back([&, lo, hi] {
      try {
        for (std::size_t i = lo; i < hi; ++i)
          fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lk(guard);
        if (!first_error)
          first_error = std::current_exception();
      }
    });
  }
  for (auto& t : pool)
    t.join();
  if (first_error)
    std::rethrow_exception(first_error);
}

} // namespace coinccl
