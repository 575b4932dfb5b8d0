#pragma once

#include <cstddef>
#include <vector>

#include <tbb/blocked_range.h>
#include <tbb/parallel_for.h>

namespace meshforge {

/// Worker count in effect. Reads MESHFORGE_THREADS once (0 or unset = auto).
std::size_t worker_count();

/// Applies the MESHFORGE_THREADS cap for the lifetime of the process.
void apply_thread_limit();

/// Calls fn(begin, end) over disjoint subranges of [0, n).
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn, std::size_t grain = 1024) {
  if (n == 0) return;
  apply_thread_limit();
  if (n <= grain) {
    fn(std::size_t{0}, n);
    return;
  }
  tbb::parallel_for(tbb::blocked_range<std::size_t>(0, n, grain),
                    [&](const tbb::blocked_range<std::size_t>& r) { fn(r.begin(), r.end()); });
}

/// Reduction whose result does not depend on the worker count: the range is
/// cut into fixed chunks of `chunk` items, each chunk is reduced into its own
/// slot by chunk_fn(begin, end, acc), and the slots are combined in order.
template <typename Acc, typename ChunkFn, typename CombineFn>
Acc deterministic_reduce(std::size_t n, std::size_t chunk, const Acc& identity, ChunkFn&& chunk_fn,
                         CombineFn&& combine) {
  if (chunk == 0) chunk = 1;
  const std::size_t chunks = (n + chunk - 1) / chunk;
  std::vector<Acc> partial(chunks, identity);
  parallel_for(
      chunks,
      [&](std::size_t lo, std::size_t hi) {
        for (std::size_t c = lo; c < hi; ++c) {
          const std::size_t begin = c * chunk;
          const std::size_t end = begin + chunk < n ? begin + chunk : n;
          chunk_fn(begin, end, partial[c]);
        }
      },
      1);
  Acc total = identity;
  for (auto& p : partial) combine(total, p);
  return total;
}

}  // namespace meshforge
