#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace qpr {

// Runs fn(i) for i in [0, count) on up to jobs threads. Safe to call with
// jobs <= 1 (runs inline). The first exception thrown is rethrown after all
// workers finish; each index must write only to its own output slot so the
// result does not depend on scheduling.
inline void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& fn) {
  if (count == 0) return;
  if (jobs <= 1 || count == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  auto worker = [&] {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!error) error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> threads;
  std::size_t nthreads = std::min<std::size_t>(std::size_t(jobs), count);
  threads.reserve(nthreads);
  for (std::size_t t = 0; t < nthreads; ++t) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace qpr
