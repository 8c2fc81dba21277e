#pragma once

#include <algorithm>
#include <cstdint>
#include <thread>
#include <vector>

namespace xtal {

// Static block partition of [0, n) over `threads` workers. Each index is
// owned by exactly one worker, so writes to disjoint per-index slots need no
// synchronization and results do not depend on the thread count.
template <typename Fn>
void parallel_for(std::int64_t n, int threads, Fn&& fn) {
  if (n <= 0) return;
  threads = std::max(1, threads);
  const std::int64_t grain = 1024;
  if (threads == 1 || n < 2 * grain) {
    for (std::int64_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const int workers = static_cast<int>(std::min<std::int64_t>(threads, (n + grain - 1) / grain));
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::int64_t chunk = (n + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const std::int64_t lo = w * chunk;
    const std::int64_t hi = std::min(n, lo + chunk);
    pool.emplace_back([lo, hi, &fn] {
      for (std::int64_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace xtal
