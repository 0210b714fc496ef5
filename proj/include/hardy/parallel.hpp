#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <thread>
#include <vector>

namespace hardy {

namespace detail {
inline std::atomic<int>& thread_setting() {
  static std::atomic<int> threads{[] {
    if (const char* env = std::getenv("HARDY_THREADS")) {
      const int n = std::atoi(env);
      if (n > 0) return n;
    }
    return 1;
  }()};
  return threads;
}
}  // namespace detail

/// Worker count used by parallel_for (default 1, or $HARDY_THREADS).
inline int thread_count() { return detail::thread_setting().load(); }
inline void set_thread_count(int n) { detail::thread_setting().store(std::max(1, n)); }

/// Runs fn(i) for i in [0, n).  Each index is handled by exactly one worker
/// and writes only its own output, so results do not depend on scheduling.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  const auto workers = static_cast<std::size_t>(std::min<std::size_t>(thread_count(), n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  // an exception in a worker is rethrown on the caller's thread (lowest worker first)
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = w; i < n; i += workers) fn(i);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace hardy
