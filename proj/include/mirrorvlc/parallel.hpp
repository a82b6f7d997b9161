#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace mirrorvlc {

inline constexpr const char* kThreadsEnv = "MIRRORVLC_THREADS";

/// Worker count: MIRRORVLC_THREADS when set to a positive integer, else the
/// hardware concurrency.
inline int default_thread_count() {
  if (const char* env = std::getenv(kThreadsEnv)) {
    try {
      const int n = std::stoi(env);
      if (n > 0) return n;
    } catch (const std::exception&) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs fn(i) for i in [0, count) on up to `threads` workers. Indices are
/// handed out dynamically, so fn must only write to per-index state. The
/// first exception thrown by any call is rethrown after all workers join.
template <typename Fn>
void parallel_for(int count, int threads, Fn&& fn) {
  if (threads <= 0) threads = default_thread_count();
  threads = std::min(threads, count);
  if (threads <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (int i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace mirrorvlc
