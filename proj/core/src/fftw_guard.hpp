#pragma once

#include <mutex>

namespace cutofflab::detail {

// FFTW plan creation and destruction are not thread-safe; every planner
// call must hold this lock.  Executing a plan is safe concurrently.
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace cutofflab::detail
