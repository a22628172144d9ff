#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace pbseg {

/// Resolves a requested thread count; 0 means hardware concurrency.
inline unsigned resolve_threads(unsigned requested) {
  if (requested != 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

/// Runs fn(begin, end) over disjoint contiguous chunks of [0, n). Chunks are
/// fixed by (n, threads) only, so writes to per-index slots are
/// schedule-independent. The first exception thrown by any chunk is rethrown.
template <class Fn>
void parallel_for_chunks(std::size_t n, unsigned threads, Fn&& fn) {
  const unsigned t = std::max(1u, std::min<unsigned>(resolve_threads(threads),
                                                     static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (t == 1 || n < 2) {
    if (n > 0) fn(std::size_t{0}, n);
    return;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> workers;
  workers.reserve(t);
  const std::size_t chunk = (n + t - 1) / t;
  for (unsigned w = 0; w < t; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    workers.emplace_back([&, begin, end] {
      try {
        fn(begin, end);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& w : workers) w.join();
  if (error) std::rethrow_exception(error);
}

template <class Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
  parallel_for_chunks(n, threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) fn(i);
  });
}

}  // namespace pbseg
