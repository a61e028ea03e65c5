#pragma once

/*
 * Minimal fork-join parallel loop.
 *
 * parallel_for(n, body) calls body(i) for i = 0..n−1, possibly from several
 * threads.  Work items are claimed from an atomic counter, so the schedule is
 * nondeterministic, but every computation in this library writes its result
 * into a slot owned by index i; outputs therefore never depend on the thread
 * count.  The CUTOFFLAB_THREADS environment variable caps the worker count
 * (re-read on every call so tests can vary it).
 */

#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace cutofflab {

inline unsigned thread_count() {
  unsigned n = std::thread::hardware_concurrency();
  if (n == 0) n = 1;
  if (const char* cap = std::getenv("CUTOFFLAB_THREADS")) {
    char* end = nullptr;
    const long parsed = std::strtol(cap, &end, 10);
    if (end != cap && parsed >= 1) n = std::min<long>(parsed, 256);
  }
  return n;
}

template <class Body>
void parallel_for(std::size_t n, Body&& body) {
  const unsigned workers = std::min<std::size_t>(thread_count(), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }

  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex error_mutex;

  auto drain = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= n || failed.load(std::memory_order_relaxed)) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        failed.store(true, std::memory_order_relaxed);
        return;
      }
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(drain);
  drain();
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace cutofflab
