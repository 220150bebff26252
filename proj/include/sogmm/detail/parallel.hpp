#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace sogmm::detail {

// Runs fn(chunk_index, begin, end) over fixed grain-sized chunks of [0, n).
// Chunk boundaries depend only on (n, grain), so callers that combine
// per-chunk results in chunk-index order get answers that are independent
// of the worker count and of scheduling. The first exception thrown by any
// chunk is rethrown on the calling thread. n_threads = 0 picks the
// hardware concurrency.
template <typename Fn>
void parallel_chunks(std::size_t n, std::size_t grain, Fn&& fn, unsigned n_threads = 0) {
  if (n == 0) {
    return;
  }
  grain = std::max<std::size_t>(grain, 1);
  const std::size_t n_chunks = (n + grain - 1) / grain;
  if (n_threads == 0) {
    n_threads = std::max(1u, std::thread::hardware_concurrency());
  }
  n_threads = static_cast<unsigned>(std::min<std::size_t>(n_threads, n_chunks));

  if (n_threads <= 1) {
    for (std::size_t c = 0; c < n_chunks; ++c) {
      fn(c, c * grain, std::min(n, (c + 1) * grain));
    }
    return;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  const auto worker = [&] {
    while (true) {
      const std::size_t c = next.fetch_add(1, std::memory_order_relaxed);
      if (c >= n_chunks) {
        break;
      }
      try {
        fn(c, c * grain, std::min(n, (c + 1) * grain));
      } catch (...) {
        const std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) {
          failure = std::current_exception();
        }
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(n_threads - 1);
  for (unsigned t = 0; t + 1 < n_threads; ++t) {
    pool.emplace_back(worker);
  }
  worker();
  for (std::thread& t : pool) {
    t.join();
  }
  if (failure) {
    std::rethrow_exception(failure);
  }
}

}  // namespace sogmm::detail
