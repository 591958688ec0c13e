#pragma once

#include <cstddef>
#include <thread>
#include <vector>

// Work partitioning that keeps results independent of the thread count.
// Work items are split into fixed-size blocks; each block is reduced
// sequentially and block results are combined in block order, so the
// floating point reduction tree depends only on the problem size.

namespace perifrac {

inline constexpr std::size_t reduction_block = 4096;

// Runs fn(block_index, begin, end) for every block of [0, n).
// Blocks are assigned to workers round-robin; fn must only write to
// state owned by its block index.
template <class Fn>
void for_each_block(std::size_t n, int threads, Fn&& fn) {
  const std::size_t nblocks = (n + reduction_block - 1) / reduction_block;
  if (threads <= 1 || nblocks <= 1) {
    for (std::size_t b = 0; b < nblocks; ++b)
      fn(b, b * reduction_block, std::min(n, (b + 1) * reduction_block));
    return;
  }
  const int nw = static_cast<int>(std::min<std::size_t>(threads, nblocks));
  std::vector<std::thread> pool;
  pool.reserve(nw);
  for (int w = 0; w < nw; ++w) {
    pool.emplace_back([&, w]() {
      for (std::size_t b = w; b < nblocks; b += nw)
        fn(b, b * reduction_block, std::min(n, (b + 1) * reduction_block));
    });
  }
  for (auto& t : pool) t.join();
}

// Pairwise sum in index order; the result is a pure function of the inputs.
inline double pairwise_sum(const double* x, std::size_t n) {
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(x, half) + pairwise_sum(x + half, n - half);
}

inline double pairwise_sum(const std::vector<double>& x) {
  return pairwise_sum(x.data(), x.size());
}

// Deterministic parallel sum of term(i) for i in [0, n).
template <class Term>
double blocked_sum(std::size_t n, int threads, Term&& term) {
  const std::size_t nblocks = (n + reduction_block - 1) / reduction_block;
  std::vector<double> partial(nblocks, 0.0);
  for_each_block(n, threads, [&](std::size_t b, std::size_t lo, std::size_t hi) {
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += term(i);
    partial[b] = s;
  });
  return pairwise_sum(partial);
}

}
