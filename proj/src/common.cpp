#include "pirogov/common.hpp"

#include <algorithm>
#include <atomic>
#include <thread>

namespace pirogov {

namespace {
std::atomic<int> g_threads{0};  // 0 = hardware default
}

int default_threads() {
  int t = g_threads.load();
  if (t > 0) return t;
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

void set_default_threads(int t) { g_threads.store(t); }

void parallel_blocks(size_t total, int threads, size_t blocks,
                     const std::function<void(size_t, size_t, size_t)>& fn) {
  if (total == 0) return;
  if (blocks == 0) blocks = 1;
  if (blocks > total) blocks = total;
  auto block_range = [&](size_t b) {
    return std::pair<size_t, size_t>(total * b / blocks, total * (b + 1) / blocks);
  };
  if (threads <= 0) threads = default_threads();
  if (threads == 1 || blocks == 1) {
    for (size_t b = 0; b < blocks; ++b) {
      auto [s, e] = block_range(b);
      fn(b, s, e);
    }
    return;
  }
  std::atomic<size_t> next{0};
  auto worker = [&]() {
    while (true) {
      size_t b = next.fetch_add(1);
      if (b >= blocks) return;
      auto [s, e] = block_range(b);
      fn(b, s, e);
    }
  };
  std::vector<std::thread> pool;
  int nthreads = std::min<int>(threads, static_cast<int>(blocks));
  pool.reserve(static_cast<size_t>(nthreads));
  for (int i = 0; i < nthreads; ++i) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
}

}  // namespace pirogov
