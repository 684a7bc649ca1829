#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace dflow {

/// Caps the number of worker threads used by batch operations.
/// Results never depend on this value; 0 restores the hardware default.
void set_thread_count(unsigned count);
unsigned thread_count();

/// Runs body(i) for i in [0, n). Each index must be independent; callers
/// that reduce write per-index results and sum them serially afterwards.
template <class Body>
void parallel_for(std::size_t n, Body&& body) {
  const std::size_t workers = std::min<std::size_t>(thread_count(), n / 256 + 1);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  const std::size_t chunk = (n + workers - 1) / workers;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&body, begin, end] {
      for (std::size_t i = begin; i < end; ++i) body(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace dflow
