#pragma once

#include <algorithm>
#include <cstdint>
#include <thread>
#include <vector>

namespace osp {

/// Thread count used when callers pass 0.
inline unsigned default_threads() { return std::max(1u, std::thread::hardware_concurrency()); }

/// Calls fn(shard, begin, end) on `threads` contiguous shards of [0, count).
/// Runs inline when a single shard suffices.
template <class Fn>
void parallel_shards(std::uint64_t count, unsigned threads, Fn&& fn) {
  if (threads == 0) threads = default_threads();
  threads = static_cast<unsigned>(std::min<std::uint64_t>(threads, std::max<std::uint64_t>(count, 1)));
  if (threads <= 1) {
    fn(0u, std::uint64_t{0}, count);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(threads);
  for (unsigned s = 0; s < threads; ++s) {
    const std::uint64_t begin = count * s / threads;
    const std::uint64_t end = count * (s + 1) / threads;
    pool.emplace_back([&fn, s, begin, end] { fn(s, begin, end); });
  }
}

}  // namespace osp
