#include "dt6d/parallel.hpp"

#include <cstdlib>
#include <thread>
#include <vector>

namespace dt6d {

int resolve_worker_count(int requested) {
  // DT6D_THREADS wins over explicit requests so a whole pipeline can be
  // pinned from the outside.
  if (const char* env = std::getenv("DT6D_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t, std::size_t)>& fn) {
  if (n == 0) return;
  const std::size_t w = static_cast<std::size_t>(workers < 1 ? 1 : workers);
  if (w == 1 || n == 1) {
    fn(0, n);
    return;
  }
  const std::size_t chunk = (n + w - 1) / w;
  std::vector<std::thread> threads;
  threads.reserve(w);
  for (std::size_t i = 0; i < w; ++i) {
    const std::size_t begin = i * chunk;
    if (begin >= n) break;
    const std::size_t end = begin + chunk < n ? begin + chunk : n;
    threads.emplace_back([&fn, begin, end] { fn(begin, end); });
  }
  for (auto& t : threads) t.join();
}

}  // namespace dt6d
