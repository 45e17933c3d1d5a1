#pragma once

// Minimal worker pool for index-parallel loops. Each index writes a disjoint
// output, so results never depend on the thread count.

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace mfwtnn {

namespace detail {

inline std::size_t env_thread_cap() {
  if (const char* env = std::getenv("MFWTNN_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<std::size_t>(v);
    } catch (...) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

inline std::atomic<std::size_t>& thread_cap_storage() {
  static std::atomic<std::size_t> cap{env_thread_cap()};
  return cap;
}

}  // namespace detail

/// Upper bound on worker threads used by internal loops.
inline std::size_t max_threads() { return detail::thread_cap_storage().load(); }

/// Sets the worker cap; 0 restores the default (MFWTNN_THREADS or hardware).
inline void set_max_threads(std::size_t n) {
  detail::thread_cap_storage().store(n == 0 ? detail::env_thread_cap() : n);
}

/// Calls fn(begin, end) on contiguous chunks covering [0, n).
template <typename Fn>
void parallel_for_range(std::size_t n, Fn&& fn) {
  const std::size_t workers = std::min(max_threads(), n);
  if (workers <= 1) {
    if (n > 0) fn(std::size_t{0}, n);
    return;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&, begin, end] {
      try {
        fn(begin, end);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

/// Calls fn(i) for i in [0, n).
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  parallel_for_range(n, [&fn](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) fn(i);
  });
}

}  // namespace mfwtnn
