#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace sinr {

/// Worker count for a request of `requested` (0 = one per hardware thread),
/// capped by the SINR_THREADS environment variable when it is set.
inline std::size_t resolve_workers(std::size_t requested) {
  std::size_t workers = requested;
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("SINR_THREADS")) {
    try {
      const long cap = std::stol(env);
      if (cap >= 1) workers = std::min(workers, static_cast<std::size_t>(cap));
    } catch (const std::exception&) {
    }
  }
  return std::max<std::size_t>(1, workers);
}

/// Runs fn(i) for i in [0, count) on up to `workers` threads. Each index must
/// only write its own outputs; the first exception thrown is rethrown here.
template <typename F>
void parallel_for(std::size_t count, std::size_t workers, F&& fn) {
  workers = std::min(workers, count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto body = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers - 1);
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(body);
    body();
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace sinr
