#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace beamproj {

// Worker count: BEAMPROJ_WORKERS if set and positive, else hardware threads.
std::size_t worker_count();

// Runs task(i) for i in [0, n). Results must be written to per-index slots;
// callers reduce them in index order so output never depends on scheduling.
// The exception of the lowest failing index is rethrown.
template <typename Task>
void parallel_for(std::size_t n, Task&& task, std::size_t workers = worker_count()) {
  if (workers <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) task(i);
    return;
  }
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto run = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        task(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  const std::size_t spawn = std::min(workers, n) - 1;
  pool.reserve(spawn);
  for (std::size_t k = 0; k < spawn; ++k) pool.emplace_back(run);
  run();
  for (std::thread& t : pool) t.join();
  for (const std::exception_ptr& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace beamproj
