#pragma once

#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

namespace pdistill {

void set_worker_count(unsigned n);
unsigned worker_count();

// Runs task(i) for i in [0, n) on the worker pool. Tasks must write only to
// their own slot.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& task);

// Pairwise reduction in index order; the result does not depend on how the
// parts were produced.
template <class T>
T tree_reduce(std::vector<T> parts) {
  if (parts.empty()) return T{};
  std::size_t n = parts.size();
  while (n > 1) {
    std::size_t half = (n + 1) / 2;
    for (std::size_t i = 0; i + half < n; ++i) parts[i] += parts[i + half];
    n = half;
  }
  return std::move(parts[0]);
}

// Computes fn(i) for every chunk in parallel and tree-reduces the results.
template <class T, class Fn>
T map_reduce_chunks(std::size_t n_chunks, Fn&& fn) {
  std::vector<T> parts(n_chunks);
  parallel_for(n_chunks, [&](std::size_t i) { parts[i] = fn(i); });
  return tree_reduce(std::move(parts));
}

}  // namespace pdistill
