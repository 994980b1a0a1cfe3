#include <gtest/gtest.h>

#include <atomic>
#include <stdexcept>
#include <vector>

#include "drrkit/parallel.hpp"

using namespace drrkit;

namespace {

struct ThreadCountGuard {
  unsigned saved = thread_count();
  ~ThreadCountGuard() { set_thread_count(saved); }
};

}  // namespace

TEST(Parallel, VisitsEveryIndexOnce) {
  ThreadCountGuard guard;
  for (unsigned t : {1u, 2u, 3u, 8u}) {
    set_thread_count(t);
    EXPECT_EQ(thread_count(), t);
    std::vector<int> hits(101, 0);
    parallel_for(0, hits.size(), [&](std::size_t i) { ++hits[i]; });
    for (int h : hits) EXPECT_EQ(h, 1);
  }
}

TEST(Parallel, EmptyAndOffsetRanges) {
  ThreadCountGuard guard;
  set_thread_count(4);
  std::atomic<int> calls{0};
  parallel_for(5, 5, [&](std::size_t) { ++calls; });
  EXPECT_EQ(calls.load(), 0);
  std::vector<int> hits(10, 0);
  parallel_for(3, 7, [&](std::size_t i) { ++hits[i]; });
  EXPECT_EQ(hits, (std::vector<int>{0, 0, 0, 1, 1, 1, 1, 0, 0, 0}));
}

TEST(Parallel, NestedCallsRunInline) {
  ThreadCountGuard guard;
  set_thread_count(4);
  std::vector<int> grid(8 * 8, 0);
  parallel_for(0, 8, [&](std::size_t i) { parallel_for(0, 8, [&](std::size_t j) { grid[i * 8 + j] += 1; }); });
  for (int h : grid) EXPECT_EQ(h, 1);
}

TEST(Parallel, PropagatesExceptions) {
  ThreadCountGuard guard;
  set_thread_count(3);
  EXPECT_THROW(parallel_for(0, 30,
                            [](std::size_t i) {
                              if (i == 17) throw std::runtime_error("boom");
                            }),
               std::runtime_error);
}

TEST(Parallel, ZeroMeansHardware) {
  ThreadCountGuard guard;
  set_thread_count(0);
  EXPECT_GE(thread_count(), 1u);
}
