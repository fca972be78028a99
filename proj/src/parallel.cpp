#include "keig/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <thread>
#include <vector>

namespace keig {

namespace {
std::atomic<int> g_threads{0};
}

int default_threads() { return g_threads.load(); }

void set_default_threads(int threads) { g_threads.store(threads < 0 ? 0 : threads); }

void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn,
                  int threads) {
  if (n == 0) return;
  int workers = threads > 0 ? threads : default_threads();
  if (workers <= 0) workers = static_cast<int>(std::thread::hardware_concurrency());
  if (workers <= 0) workers = 1;
  workers = static_cast<int>(std::min<std::size_t>(workers, n));
  if (workers == 1) {
    fn(0, n);
    return;
  }
  const std::size_t chunk = (n + workers - 1) / workers;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    if (begin >= n) break;
    const std::size_t end = std::min(n, begin + chunk);
    pool.emplace_back([&fn, begin, end] { fn(begin, end); });
  }
  for (auto& t : pool) t.join();
}

}  // namespace keig
