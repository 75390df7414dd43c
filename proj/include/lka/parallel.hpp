#ifndef LKA_PARALLEL_HPP
#define LKA_PARALLEL_HPP

#include <functional>
#include <thread>
#include <vector>

namespace lka {

inline int resolve_threads(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? int(hw) : 1;
}

// Static block partition over [0, n). Work items must be independent;
// replicate-level determinism comes from counter-based streams, so the
// thread layout never changes results.
inline void parallel_for(long n, int threads, const std::function<void(long)>& fn) {
  threads = resolve_threads(threads);
  if (threads <= 1 || n < 2) {
    for (long i = 0; i < n; ++i) fn(i);
    return;
  }
  const int workers = int(std::min<long>(threads, n));
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (long i = w; i < n; i += workers) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace lka

#endif
