#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace brw {

/// Worker count used when a caller passes 0. Reads BRW_THREADS, falls back
/// to the hardware concurrency.
inline unsigned default_thread_count() {
  if (const char* env = std::getenv("BRW_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return static_cast<unsigned>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs body(begin, end) over [0, n) split into contiguous blocks. Blocks
/// are fixed by n and block_size only, so anything computed per block is
/// independent of the thread count.
template <class Body>
void parallel_blocks(std::size_t n, std::size_t block_size, unsigned threads, Body&& body) {
  if (n == 0) return;
  if (threads == 0) threads = default_thread_count();
  const std::size_t blocks = (n + block_size - 1) / block_size;
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(threads, blocks));
  auto run_block = [&](std::size_t b) {
    const std::size_t lo = b * block_size;
    body(b, lo, std::min(n, lo + block_size));
  };
  if (workers <= 1) {
    for (std::size_t b = 0; b < blocks; ++b) run_block(b);
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t b = w; b < blocks; b += workers) run_block(b);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

/// Deterministic parallel sum: partial sums per fixed block, merged in block
/// order.
template <class Term>
double parallel_sum(std::size_t n, unsigned threads, Term&& term, std::size_t block_size = 4096) {
  const std::size_t blocks = (n + block_size - 1) / block_size;
  std::vector<double> partial(blocks, 0.0);
  parallel_blocks(n, block_size, threads, [&](std::size_t b, std::size_t lo, std::size_t hi) {
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += term(i);
    partial[b] = s;
  });
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

}  // namespace brw
