#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace neurocoarse {

// NEUROCOARSE_THREADS env override, otherwise hardware concurrency.
int default_thread_count();

// requested <= 0 means "use the default"
int resolve_threads(int requested);

// Static block partition over [0, n). f(i) must only touch per-index state;
// numerical results never depend on the thread count because every index owns
// its random stream and reductions happen in index order on the caller side.
template <class F>
void parallel_for(std::size_t n, int threads, F&& f) {
  if (n == 0) return;
  const std::size_t nt = std::min<std::size_t>(
      static_cast<std::size_t>(resolve_threads(threads)), n);
  if (nt <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::exception_ptr err;
  std::mutex err_mu;
  auto work = [&](std::size_t t) {
    const std::size_t lo = n * t / nt;
    const std::size_t hi = n * (t + 1) / nt;
    try {
      for (std::size_t i = lo; i < hi; ++i) f(i);
    } catch (...) {
      std::lock_guard<std::mutex> lock(err_mu);
      if (!err) err = std::current_exception();
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(nt - 1);
  for (std::size_t t = 1; t < nt; ++t) pool.emplace_back(work, t);
  work(0);
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

}  // namespace neurocoarse
