#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace semr {

/** Runs body(0..n_tasks-1) on up to `workers` threads. Tasks must write only
 *  to their own output slot; the order of execution is unspecified, so callers
 *  preallocate results indexed by task and stay deterministic regardless of
 *  worker count. The first exception thrown by any task is rethrown here. */
inline void parallel_for(long long n_tasks, int workers,
                         const std::function<void(long long)>& body) {
  if (n_tasks <= 0) return;
  if (workers < 1) workers = 1;
  const int threads = static_cast<int>(
      std::min<long long>(workers, n_tasks));
  if (threads == 1) {
    for (long long i = 0; i < n_tasks; ++i) body(i);
    return;
  }

  std::atomic<long long> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;

  auto worker = [&] {
    for (;;) {
      const long long i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= n_tasks || failed.load(std::memory_order_relaxed)) return;
      try {
        body(i);
      } catch (...) {
        {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
        failed.store(true, std::memory_order_relaxed);
        return;
      }
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace semr
