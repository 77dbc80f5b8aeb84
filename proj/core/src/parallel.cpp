#include "omnisweep/parallel.hpp"

#include <thread>
#include <vector>

namespace omnisweep {

int resolve_threads(int threads) {
  if (threads > 0) return threads;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? int(hw) : 1;
}

void parallel_chunks(int64_t begin, int64_t end, int threads,
                     const std::function<void(int64_t, int64_t)>& fn) {
  const int64_t n = end - begin;
  if (n <= 0) return;
  threads = resolve_threads(threads);
  if (threads > n) threads = int(n);
  if (threads <= 1) {
    fn(begin, end);
    return;
  }
  std::vector<std::thread> workers;
  workers.reserve(threads);
  const int64_t chunk = (n + threads - 1) / threads;
  for (int t = 0; t < threads; ++t) {
    const int64_t c0 = begin + t * chunk;
    const int64_t c1 = c0 + chunk < end ? c0 + chunk : end;
    if (c0 >= c1) break;
    workers.emplace_back([&fn, c0, c1] { fn(c0, c1); });
  }
  for (auto& w : workers) w.join();
}

void parallel_for(int64_t begin, int64_t end, int threads,
                  const std::function<void(int64_t)>& fn) {
  parallel_chunks(begin, end, threads, [&fn](int64_t c0, int64_t c1) {
    for (int64_t i = c0; i < c1; ++i) fn(i);
  });
}

}  // namespace omnisweep
