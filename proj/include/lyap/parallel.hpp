#pragma once

#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace lyap {

/// Runs fn(0..count-1) over `jobs` threads with strided assignment. Callers
/// write results into preallocated slots indexed by the loop variable, so the
/// outcome is independent of scheduling. The first exception wins and is
/// rethrown on the calling thread.
inline void parallel_for(std::int64_t count, int jobs,
                         const std::function<void(std::int64_t)>& fn) {
  if (count <= 0) return;
  jobs = static_cast<int>(std::max<std::int64_t>(1, std::min<std::int64_t>(jobs, count)));
  if (jobs == 1) {
    for (std::int64_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> workers;
  workers.reserve(jobs);
  for (int w = 0; w < jobs; ++w) {
    workers.emplace_back([&, w]() {
      try {
        for (std::int64_t i = w; i < count; i += jobs) fn(i);
      } catch (...) {
        std::scoped_lock lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& t : workers) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

inline int hardware_jobs() {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : static_cast<int>(n);
}

}  // namespace lyap
