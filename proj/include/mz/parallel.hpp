#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace mz {

/// Worker count: MZ_THREADS if set to a positive integer, otherwise the
/// hardware concurrency (at least 1).
std::size_t worker_count();

/// Splits [0, n_items) into fixed blocks of `block_size` and runs
/// fn(block_index, begin, end) for each block on up to worker_count()
/// threads. The block layout depends only on n_items and block_size, so
/// callers that reduce per-block results in block order get output that is
/// independent of the thread count. If blocks throw, the exception of the
/// lowest-numbered failing block is rethrown.
template <class Fn>
void parallel_for_blocks(std::size_t n_items, std::size_t block_size, Fn&& fn) {
  if (n_items == 0) return;
  block_size = std::max<std::size_t>(block_size, 1);
  const std::size_t n_blocks = (n_items + block_size - 1) / block_size;
  const std::size_t workers = std::min(worker_count(), n_blocks);

  std::vector<std::exception_ptr> errors(n_blocks);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (;;) {
      const std::size_t b = next.fetch_add(1);
      if (b >= n_blocks) return;
      const std::size_t begin = b * block_size;
      const std::size_t end = std::min(n_items, begin + block_size);
      try {
        fn(b, begin, end);
      } catch (...) {
        errors[b] = std::current_exception();
      }
    }
  };

  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace mz
