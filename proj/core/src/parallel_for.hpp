#pragma once

/*
 * Deterministic work sharing for embarrassingly parallel loops.
 *
 * Each loop body owns its index's output slot and derives any randomness from
 * a per-index stream, so the result is identical for every worker count.  The
 * worker count is capped by the CUTOFFLAB_THREADS environment variable.
 */

#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace cutofflab::detail {

inline unsigned worker_count() {
  unsigned hardware = std::thread::hardware_concurrency();
  if (hardware == 0) hardware = 1;
  if (const char* env = std::getenv("CUTOFFLAB_THREADS")) {
    char* end = nullptr;
    const unsigned long parsed = std::strtoul(env, &end, 10);
    if (end != env && parsed >= 1 && parsed <= 256)
      return static_cast<unsigned>(parsed);
  }
  return hardware;
}

// Runs body(i) for i in [0, n); any exception is rethrown on the caller.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  const unsigned workers = worker_count();
  if (workers <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }

  std::atomic<std::size_t> cursor{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  const std::size_t chunk = std::max<std::size_t>(1, n / (8 * workers));

  auto run = [&] {
    for (;;) {
      const std::size_t begin = cursor.fetch_add(chunk);
      if (begin >= n) return;
      const std::size_t end = std::min(n, begin + chunk);
      try {
        for (std::size_t i = begin; i < end; ++i) body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };

  std::vector<std::thread> pool;
  const unsigned spawned = static_cast<unsigned>(
      std::min<std::size_t>(workers, (n + chunk - 1) / chunk));
  pool.reserve(spawned);
  for (unsigned w = 0; w < spawned; ++w) pool.emplace_back(run);
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace cutofflab::detail
