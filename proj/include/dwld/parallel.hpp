#pragma once

#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

#include "dwld/types.hpp"

namespace dwld {

/// 0 or negative -> hardware concurrency.
inline int resolve_thread_count(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Runs fn(i) for i in [0, n) on up to n_threads workers with dynamic
/// scheduling. fn must only write to per-index state; determinism of the
/// overall result is then independent of scheduling.
inline void parallel_for(Index n, int n_threads, const std::function<void(Index)>& fn) {
  n_threads = resolve_thread_count(n_threads);
  if (n_threads <= 1 || n <= 1) {
    for (Index i = 0; i < n; ++i) fn(i);
    return;
  }

  std::atomic<Index> next{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;

  auto worker = [&] {
    for (;;) {
      const Index i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };

  std::vector<std::thread> threads;
  const int count = static_cast<int>(std::min<Index>(n, n_threads));
  threads.reserve(static_cast<std::size_t>(count));
  for (int t = 0; t < count; ++t) threads.emplace_back(worker);
  for (auto& t : threads) t.join();

  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace dwld
