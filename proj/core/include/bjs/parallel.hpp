#pragma once

#include <algorithm>
#include <functional>
#include <thread>
#include <vector>

namespace bjs {

// Chunked index-range dispatch.  Chunk boundaries depend only on (n,
// threads), so order-independent reductions give reproducible results.
inline void parallel_for(size_t n, int threads, const std::function<void(size_t, size_t, int)>& fn) {
  threads = std::max(1, threads);
  if (threads == 1 || n < 2048) {
    fn(0, n, 0);
    return;
  }
  size_t chunk = (n + threads - 1) / static_cast<size_t>(threads);
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) {
    size_t lo = std::min(n, static_cast<size_t>(t) * chunk);
    size_t hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([=, &fn] { fn(lo, hi, t); });
  }
  for (auto& th : pool) th.join();
}

}  // namespace bjs
