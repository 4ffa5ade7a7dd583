#pragma once

#include <atomic>
#include <functional>
#include <thread>
#include <vector>

namespace hanalab {

// Runs fn(i) for i in [0, n) across up to `threads` workers. Each index must
// be independent and write only to its own slot; results are then
// schedule-independent and bit-exact regardless of the thread count.
inline void parallel_for(long n, const std::function<void(long)>& fn, int threads = 0) {
  if (threads <= 0) threads = int(std::thread::hardware_concurrency());
  if (threads <= 1 || n <= 1) {
    for (long i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::atomic<long> next{0};
  const int workers = int(std::min<long>(threads, n));
  pool.reserve(size_t(workers));
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      while (true) {
        const long i = next.fetch_add(1);
        if (i >= n) return;
        fn(i);
      }
    });
  for (auto& t : pool) t.join();
}

}  // namespace hanalab
