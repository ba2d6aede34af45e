#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <vector>

#include "dispatch/errors.hpp"
#include "dispatch/event_queue.hpp"

namespace dispatch {
namespace {

TEST(EventQueue, EqualTimesPopInInsertionOrder) {
  EventQueue q;
  q.push({.time = 5});
  q.push({.time = 2});
  q.push({.time = 2});
  auto a = q.pop(), b = q.pop(), c = q.pop();
  ASSERT_TRUE(a && b && c);
  EXPECT_EQ(a->time, 2);
  EXPECT_EQ(a->seq, 2u);
  EXPECT_EQ(b->time, 2);
  EXPECT_EQ(b->seq, 3u);
  EXPECT_EQ(c->time, 5);
  EXPECT_EQ(c->seq, 1u);
}

TEST(EventQueue, EmptyPopIsNone) {
  EventQueue q;
  EXPECT_FALSE(q.pop().has_value());
  EXPECT_EQ(q.peek(), nullptr);
}

TEST(EventQueue, RandomPushesPopSorted) {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> t(0, 500);
  EventQueue q;
  std::vector<std::pair<double, std::uint64_t>> pushed;
  for (int i = 0; i < 10000; ++i) {
    const double time = t(rng);
    pushed.emplace_back(time, q.push({.time = time}));
  }
  std::sort(pushed.begin(), pushed.end());
  for (const auto& [time, seq] : pushed) {
    auto e = q.pop();
    ASSERT_TRUE(e);
    EXPECT_EQ(e->time, time);
    EXPECT_EQ(e->seq, seq);
  }
  EXPECT_TRUE(q.empty());
}

TEST(EventQueue, InterleavedPushesNeverGoBackInTime) {
  std::mt19937_64 rng(2);
  std::exponential_distribution<double> gap(1.0);
  EventQueue q;
  q.push({.time = 0});
  double last = 0;
  for (int i = 0; i < 5000 && !q.empty(); ++i) {
    auto e = q.pop();
    EXPECT_GE(e->time, last);
    last = e->time;
    EXPECT_EQ(q.clock(), last);
    q.push({.time = last + gap(rng)});
    if (i % 3 == 0) q.push({.time = last});
  }
}

TEST(EventQueue, PastEventIsCausalityError) {
  EventQueue q;
  q.push({.time = 10});
  q.pop();
  EXPECT_THROW(q.push({.time = 9.5}), CausalityError);
  EXPECT_NO_THROW(q.push({.time = 10}));
  EXPECT_THROW(q.push({.time = std::nan("")}), CausalityError);
}

}  // namespace
}  // namespace dispatch
