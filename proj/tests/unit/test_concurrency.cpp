#include <gtest/gtest.h>

#include "history.hpp"

TEST(History, CheckerFlagsStaleRead) {
  using testing_support::History;
  std::map<std::string, std::vector<History::Write>> writes;
  writes["k"] = {{1, 2, true}, {5, 6, false}};
  EXPECT_TRUE(History::check(writes, {{3, 4, "k", true}}).empty());
  EXPECT_FALSE(History::check(writes, {{3, 4, "k", false}}).empty());
  EXPECT_TRUE(History::check(writes, {{4, 7, "k", false}}).empty());
  EXPECT_FALSE(History::check(writes, {{7, 8, "k", true}}).empty());
  EXPECT_TRUE(History::check(writes, {{0, 1, "k", false}}).empty());
}

TEST(Concurrency, LookupsAreLinearizable) {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto run = testing_support::run_history(2, 2, 300, 4000, seed);
    EXPECT_TRUE(run.violation.empty()) << run.violation;
    EXPECT_EQ(run.torn, 0u);
    EXPECT_EQ(run.check_errors, 0u);
    EXPECT_EQ(run.lost, 0u);
    EXPECT_EQ(run.reads, 2u * 4000);
  }
}

TEST(Concurrency, SmallTableUnderRelocationPressure) {
  const auto run = testing_support::run_history(2, 2, 1500, 6000, 9, 1 << 10);
  EXPECT_TRUE(run.violation.empty()) << run.violation;
  EXPECT_EQ(run.torn, 0u);
  EXPECT_EQ(run.check_errors, 0u);
  EXPECT_EQ(run.lost, 0u);
}
