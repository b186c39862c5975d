#include <doctest.h>

#include <atomic>
#include <stdexcept>
#include <vector>

#include "rfsd/parallel.hpp"

using namespace rfsd;

TEST_CASE("parallel_for visits every index once") {
  for (int threads : {1, 2, 7}) {
    set_num_threads(threads);
    std::vector<int> hits(1000, 0);
    parallel_for(hits.size(), [&](std::size_t i) { hits[i] += 1; });
    for (int h : hits) CHECK(h == 1);
  }
  set_num_threads(1);
}

TEST_CASE("nested parallel_for runs inline") {
  set_num_threads(4);
  std::atomic<int> total{0};
  parallel_for(8, [&](std::size_t) { parallel_for(10, [&](std::size_t) { total += 1; }); });
  CHECK(total == 80);
  set_num_threads(1);
}

TEST_CASE("exceptions propagate") {
  set_num_threads(3);
  CHECK_THROWS_AS(parallel_for(50, [](std::size_t i) {
                    if (i == 17) throw std::runtime_error("boom");
                  }),
                  std::runtime_error);
  set_num_threads(1);
  CHECK(num_threads() == 1);
}
