// SPDX-License-Identifier: Apache-2.0

#ifndef QENET_PARALLEL_HPP
#define QENET_PARALLEL_HPP

#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace qenet {

/// Run fn(0..count-1) on up to worker_count threads. Results must be
/// written to pre-sized slots inside fn, so output never depends on
/// scheduling. worker_count <= 1 runs inline.
template <typename Fn>
void parallel_for(std::size_t count, int worker_count, Fn&& fn) {
  if (count == 0) return;
  if (worker_count <= 1 || count == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  const std::size_t threads =
      std::min<std::size_t>(static_cast<std::size_t>(worker_count), count);
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&]() {
      for (;;) {
        std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace qenet

#endif
