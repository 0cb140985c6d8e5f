#pragma once

#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace uwblink {

[[nodiscard]] inline int resolve_worker_count(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

// Splits [0, n) into `workers` contiguous batches and runs them on separate
// threads. Each index writes only its own output slot, so results are
// bit-identical for any worker count.
inline void parallel_for_batches(int workers, std::size_t n,
                                 const std::function<void(std::size_t)>& body) {
  workers = resolve_worker_count(workers);
  if (workers <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  const auto w = static_cast<std::size_t>(workers) < n ? static_cast<std::size_t>(workers) : n;
  std::vector<std::thread> pool;
  std::exception_ptr first_error;
  std::mutex error_mutex;
  pool.reserve(w);
  for (std::size_t b = 0; b < w; ++b) {
    const std::size_t begin = n * b / w;
    const std::size_t end = n * (b + 1) / w;
    pool.emplace_back([&, begin, end] {
      try {
        for (std::size_t i = begin; i < end; ++i) body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace uwblink
