#pragma once

#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace netchoice {

// Runs fn(partial, begin, end) over fixed-size blocks of [0, n) and returns
// one partial per block, in block order. The block size is independent of the
// thread count, so folding the partials in order gives bit-identical results
// for any `threads`.
template <class MakePartial, class BlockFn>
auto blocked_map(std::size_t n, int threads, MakePartial make, BlockFn fn,
                 std::size_t block_size = 256)
    -> std::vector<decltype(make())> {
  using Partial = decltype(make());
  const std::size_t n_blocks = n == 0 ? 0 : (n + block_size - 1) / block_size;
  std::vector<Partial> partials;
  partials.reserve(n_blocks);
  for (std::size_t b = 0; b < n_blocks; ++b) partials.push_back(make());

  auto run_block = [&](std::size_t b) {
    const std::size_t begin = b * block_size;
    const std::size_t end = std::min(n, begin + block_size);
    fn(partials[b], begin, end);
  };

  if (threads <= 1 || n_blocks <= 1) {
    for (std::size_t b = 0; b < n_blocks; ++b) run_block(b);
    return partials;
  }

  std::atomic<std::size_t> next{0};
  const int n_workers = static_cast<int>(std::min<std::size_t>(threads, n_blocks));
  std::vector<std::thread> workers;
  workers.reserve(n_workers);
  for (int w = 0; w < n_workers; ++w) {
    workers.emplace_back([&] {
      for (std::size_t b = next.fetch_add(1); b < n_blocks; b = next.fetch_add(1)) run_block(b);
    });
  }
  for (auto& t : workers) t.join();
  return partials;
}

}  // namespace netchoice
