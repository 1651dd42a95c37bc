#pragma once

#include <algorithm>
#include <cstddef>
#include <future>
#include <thread>
#include <vector>

namespace exphedge {

// Work is split into fixed-size blocks determined only by (n, block), and
// block results are combined in block order. Results are therefore
// bit-identical no matter how many threads execute the blocks.
constexpr std::size_t kDefaultBlock = 4096;

inline unsigned worker_count(std::size_t n_blocks) {
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  return static_cast<unsigned>(std::min<std::size_t>(hw, n_blocks));
}

// fn(begin, end) runs once per block over disjoint index ranges.
template <class Fn>
void for_blocks(std::size_t n, std::size_t block, Fn&& fn) {
  if (n == 0) return;
  const std::size_t n_blocks = (n + block - 1) / block;
  const unsigned workers = worker_count(n_blocks);
  if (workers <= 1) {
    for (std::size_t b = 0; b < n_blocks; ++b) {
      fn(b * block, std::min(n, (b + 1) * block));
    }
    return;
  }
  std::vector<std::future<void>> tasks;
  tasks.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    tasks.push_back(std::async(std::launch::async, [=, &fn] {
      for (std::size_t b = w; b < n_blocks; b += workers) {
        fn(b * block, std::min(n, (b + 1) * block));
      }
    }));
  }
  for (auto& t : tasks) t.get();
}

// per_block(begin, end) -> T; partials are combined left to right.
template <class T, class PerBlock, class Combine>
T blocked_reduce(std::size_t n, std::size_t block, T init, PerBlock&& per_block,
                 Combine&& combine) {
  if (n == 0) return init;
  const std::size_t n_blocks = (n + block - 1) / block;
  std::vector<T> partial(n_blocks, init);
  for_blocks(n, block, [&](std::size_t begin, std::size_t end) {
    partial[begin / block] = per_block(begin, end);
  });
  T acc = init;
  for (const T& p : partial) acc = combine(acc, p);
  return acc;
}

}  // namespace exphedge
