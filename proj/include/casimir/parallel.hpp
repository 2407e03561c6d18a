#pragma once

#include <algorithm>
#include <charconv>
#include <cstddef>
#include <cstdlib>
#include <cstring>
#include <thread>
#include <vector>

namespace casimir {

/// Worker count for internal parallel loops. CASIMIR_THREADS overrides the
/// hardware concurrency; values < 1 or unparsable fall back to 1.
inline unsigned thread_count() {
  if (const char* env = std::getenv("CASIMIR_THREADS")) {
    unsigned n = 0;
    auto [p, ec] = std::from_chars(env, env + std::strlen(env), n);
    if (ec == std::errc{} && n > 0) return n;
    return 1;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs fn(i) for i in [0, n). Each index is visited exactly once and fn must
/// only write state owned by index i, so results do not depend on the
/// number of workers.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn, std::size_t min_chunk = 8) {
  const std::size_t workers =
      std::min<std::size_t>(thread_count(), (n + min_chunk - 1) / std::max<std::size_t>(min_chunk, 1));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(workers - 1);
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 1; w < workers; ++w) {
    const std::size_t lo = w * chunk, hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&fn, lo, hi] {
      for (std::size_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (std::size_t i = 0; i < std::min(n, chunk); ++i) fn(i);
}

}  // namespace casimir
