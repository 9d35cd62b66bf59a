#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace rsrf {

/// Splits [0, n) into `threads` contiguous chunks and calls fn(worker, begin, end)
/// on each. The partition depends only on (n, threads), so per-worker results
/// reduced in worker order are reproducible. threads <= 1 runs inline.
template <typename Fn>
void parallel_chunks(std::size_t n, int threads, Fn&& fn) {
  const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(threads, n));
  if (workers <= 1) {
    fn(std::size_t{0}, std::size_t{0}, n);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(workers - 1);
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 1; w < workers; ++w) {
    const std::size_t b = std::min(n, w * chunk);
    const std::size_t e = std::min(n, b + chunk);
    pool.emplace_back([&fn, w, b, e] { fn(w, b, e); });
  }
  fn(std::size_t{0}, std::size_t{0}, std::min(n, chunk));
}

}  // namespace rsrf
