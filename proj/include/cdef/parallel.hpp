#pragma once

// Per-point kernels. Every analysis that loops over grid points goes through
// for_each_index so that the serial path stays available as the reference the
// OpenMP path is tested against.

#include <cstddef>
#include <exception>
#include <mutex>

namespace cdef {

enum class Exec { serial, parallel };

inline Exec default_exec() { return Exec::parallel; }

/// Calls fn(i) for i in [0, count). Results must be written to slot i only.
/// If iterations throw, the exception of the lowest index is rethrown, so the
/// reported failure does not depend on scheduling.
template <class Fn>
void for_each_index(std::size_t count, Exec exec, Fn&& fn) {
  if (exec == Exec::serial) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::exception_ptr first;
  std::size_t first_index = count;
  std::mutex guard;
  const long n = static_cast<long>(count);
#pragma omp parallel for schedule(dynamic, 1)
  for (long i = 0; i < n; ++i) {
    try {
      fn(static_cast<std::size_t>(i));
    } catch (...) {
      std::lock_guard<std::mutex> lock(guard);
      if (static_cast<std::size_t>(i) < first_index) {
        first_index = static_cast<std::size_t>(i);
        first = std::current_exception();
      }
    }
  }
  if (first) std::rethrow_exception(first);
}

} // namespace cdef
