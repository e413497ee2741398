#pragma once

#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "osdec/errors.hpp"

namespace osdec {

// Runs body(i) for i in [0, count) on up to `jobs` threads. Work items are
// claimed from a shared atomic counter, so the partition of indices onto
// threads depends on timing; callers must make each item independent and
// write results into slots addressed by i, never by arrival order. The
// first exception thrown by any item is rethrown on the calling thread
// after all workers finish.
template <typename Body>
void parallel_for(long count, int jobs, Body&& body) {
  if (count < 0) throw InvalidInput("parallel_for: negative count");
  if (jobs < 1) throw InvalidInput("parallel_for: need at least one job");
  if (count == 0) return;

  if (jobs == 1 || count == 1) {
    for (long i = 0; i < count; ++i) body(i);
    return;
  }

  std::atomic<long> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;

  auto worker = [&]() {
    for (;;) {
      const long i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= count) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };

  const int spawn = int(std::min<long>(jobs, count));
  std::vector<std::thread> pool;
  pool.reserve(spawn);
  for (int t = 0; t < spawn; ++t) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace osdec
