#include <doctest.h>

#include <cmath>
#include <vector>

#include "sogmm/detail/parallel.hpp"

namespace {

// Chunk-order fold of a deliberately rounding-sensitive series; the result
// must not depend on how many workers executed the chunks.
double chunked_sum(std::size_t n, unsigned n_threads) {
  constexpr std::size_t grain = 64;
  std::vector<double> partial((n + grain - 1) / grain, 0.0);
  sogmm::detail::parallel_chunks(
      n, grain,
      [&](std::size_t chunk, std::size_t begin, std::size_t end) {
        double local = 0.0;
        for (std::size_t i = begin; i < end; ++i) {
          local += std::sin(static_cast<double>(i)) / (1.0 + static_cast<double>(i));
        }
        partial[chunk] = local;
      },
      n_threads);
  double total = 0.0;
  for (const double p : partial) {
    total += p;
  }
  return total;
}

}  // namespace

TEST_CASE("chunked reductions are independent of the worker count") {
  const double sequential = chunked_sum(5000, 1);
  for (const unsigned workers : {2u, 3u, 7u, 16u}) {
    CHECK(chunked_sum(5000, workers) == sequential);
  }
}

TEST_CASE("every index is visited exactly once") {
  std::vector<int> visits(1000, 0);
  sogmm::detail::parallel_chunks(
      visits.size(), 32,
      [&](std::size_t, std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
          ++visits[i];
        }
      },
      5);
  for (const int v : visits) {
    CHECK(v == 1);
  }
}

TEST_CASE("worker exceptions surface on the calling thread") {
  CHECK_THROWS_AS(sogmm::detail::parallel_chunks(
                      100, 8,
                      [&](std::size_t chunk, std::size_t, std::size_t) {
                        if (chunk == 3) {
                          throw std::runtime_error("boom");
                        }
                      },
                      4),
                  std::runtime_error);
}

TEST_CASE("empty ranges are a no-op") {
  bool called = false;
  sogmm::detail::parallel_chunks(0, 16, [&](std::size_t, std::size_t, std::size_t) {
    called = true;
  });
  CHECK_FALSE(called);
}
