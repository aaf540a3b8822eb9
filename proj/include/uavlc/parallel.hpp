#pragma once

#include <atomic>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace uavlc {

/// Worker cap for embarrassingly parallel experiment cells: the UAVLC_THREADS
/// environment variable when set, otherwise the hardware concurrency.
inline int thread_budget() {
  if (const char* env = std::getenv("UAVLC_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

/// Runs f(0..n-1) on up to thread_budget() workers. Each index must be
/// independent; results should be written to pre-sized slots.
template <typename F>
void parallel_for(int n, F&& f) {
  const int workers = std::min(n, thread_budget());
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) f(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace uavlc
