#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace stepstream {

/// Worker count used when a caller passes 0.
inline unsigned default_thread_count() { return std::max(1u, std::thread::hardware_concurrency()); }

/// Splits [0, count) into `threads` contiguous chunks and runs
/// fn(chunk_index, begin, end) on each, one std::thread per chunk beyond the
/// first. Chunk boundaries depend only on (count, threads).
template <typename Fn>
void parallel_chunks(std::size_t count, unsigned threads, Fn&& fn) {
  if (threads == 0) threads = default_thread_count();
  const std::size_t chunks = std::max<std::size_t>(1, std::min<std::size_t>(threads, count));
  const std::size_t base = count / chunks, extra = count % chunks;
  auto bounds = [&](std::size_t c) {
    const std::size_t begin = c * base + std::min(c, extra);
    return std::pair{begin, begin + base + (c < extra ? 1 : 0)};
  };
  std::vector<std::thread> workers;
  workers.reserve(chunks - 1);
  for (std::size_t c = 1; c < chunks; ++c) {
    workers.emplace_back([&, c] {
      const auto [b, e] = bounds(c);
      fn(c, b, e);
    });
  }
  const auto [b, e] = bounds(0);
  fn(std::size_t{0}, b, e);
  for (auto& w : workers) w.join();
}

}  // namespace stepstream
