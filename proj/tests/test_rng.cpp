#include <gtest/gtest.h>

#include <atomic>
#include <set>
#include <stdexcept>
#include <vector>

#include "ergowass/parallel.hpp"
#include "ergowass/rng.hpp"

using namespace ergowass;

TEST(Rng, SameStreamSameDraws) {
  Rng a(RngStream{42, 7}), b(RngStream{42, 7});
  for (int i = 0; i < 1000; ++i) EXPECT_EQ(a(), b());
}

TEST(Rng, DistinctStreamsDiffer) {
  std::set<std::uint64_t> firsts;
  for (std::uint64_t s = 0; s < 1000; ++s) firsts.insert(Rng(RngStream{1, s})());
  for (std::uint64_t s = 0; s < 1000; ++s) firsts.insert(Rng(RngStream{2, s})());
  EXPECT_EQ(firsts.size(), 2000u);
}

TEST(RngStream, ChildrenAreDistinctAndStable) {
  const RngStream base{5, 0};
  EXPECT_EQ(base.child(3), base.child(3));
  std::set<std::uint64_t> ids;
  for (std::uint64_t k = 0; k < 10000; ++k) ids.insert(base.child(k).stream);
  EXPECT_EQ(ids.size(), 10000u);
  EXPECT_NE(base.child(1).child(2), base.child(2).child(1));
}

TEST(Rng, UniformAndBelowRanges) {
  Rng r(RngStream{1, 1});
  for (int i = 0; i < 10000; ++i) {
    const double u = r.uniform();
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
    EXPECT_LT(r.below(7), 7u);
  }
}

TEST(ParallelFor, ResultsIndependentOfThreadCount) {
  auto run = [](unsigned threads) {
    std::vector<double> out(200);
    parallel_for(out.size(), threads, [&](std::size_t i) {
      Rng r(RngStream{9, 0}.child(i));
      out[i] = r.normal();
    });
    return out;
  };
  EXPECT_EQ(run(1), run(4));
}

TEST(ParallelFor, RethrowsLowestIndexFailure) {
  std::atomic<int> ran{0};
  try {
    parallel_for(50, 4, [&](std::size_t i) {
      ++ran;
      if (i == 7 || i == 30) throw std::runtime_error("task " + std::to_string(i));
    });
    FAIL();
  } catch (const std::runtime_error& e) {
    EXPECT_STREQ(e.what(), "task 7");
  }
  EXPECT_EQ(ran.load(), 50);
}
