#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace mft {

namespace detail {
inline std::atomic<unsigned>& thread_limit_slot() {
  static std::atomic<unsigned> limit{0};  // 0: not set, fall back to env / hardware
  return limit;
}
}  // namespace detail

/// Caps the number of worker threads used by every parallel loop in the library.
inline void set_thread_limit(unsigned n) { detail::thread_limit_slot() = n; }

inline unsigned thread_limit() {
  unsigned n = detail::thread_limit_slot();
  if (n > 0) return n;
  if (const char* env = std::getenv("MFT_THREADS")) {
    try {
      int v = std::stoi(env);
      if (v > 0) return static_cast<unsigned>(v);
    } catch (...) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs body(i) for i in [0, n). Each index is handled exactly once and callers
/// write into index-addressed slots, so results do not depend on scheduling.
template <class Body>
void parallel_for(std::size_t n, Body&& body) {
  unsigned workers = static_cast<unsigned>(std::min<std::size_t>(thread_limit(), n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) body(i);
    });
  }
  for (auto& t : pool) t.join();
}

/// parallel_for that collects one value per index, in index order.
template <class T, class Fn>
std::vector<T> parallel_map(std::size_t n, Fn&& fn) {
  std::vector<T> out(n);
  parallel_for(n, [&](std::size_t i) { out[i] = fn(i); });
  return out;
}

}  // namespace mft
