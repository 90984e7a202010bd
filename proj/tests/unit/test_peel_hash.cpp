#include <gtest/gtest.h>

#include <random>

#include "cuckoo_trie/peel_hash.hpp"
#include "oracles.hpp"

using namespace cuckoo_trie;

namespace {

// S = 1024 with M[0] = 7; other displacements are arbitrary.
HashParams fixture() {
  std::vector<std::uint64_t> m(16);
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = 7 + 31 * i;
  return HashParams(1024, m);
}

}  // namespace

TEST(PeelHash, ExtendExamples) {
  const HashParams p = fixture();
  EXPECT_EQ(oracle::extend(0, 5, 1024), 2560u);
  EXPECT_EQ(oracle::extend(2560, 3, 1024), 1616u);
  EXPECT_EQ(p.extend(0, 5), 2560u);
  EXPECT_EQ(p.extend(2560, 3), 1616u);
  EXPECT_EQ(p.extend(0, 0), 0u);
}

TEST(PeelHash, PeelExamples) {
  const HashParams p = fixture();
  EXPECT_EQ(oracle::peel(2560, 5, 1024), 0u);
  EXPECT_EQ(oracle::peel(1616, 3, 1024), 2560u);
  EXPECT_EQ(p.peel(2560, 5), 0u);
  EXPECT_EQ(p.peel(1616, 3), 2560u);
}

TEST(PeelHash, RandomRoundTripAndRange) {
  const HashParams p(1 << 20, 4);
  std::mt19937_64 rng(5);
  for (int i = 0; i < 10000; ++i) {
    const HashValue h = rng() % p.hash_space();
    const auto c = static_cast<Symbol>(rng() % 32);
    const HashValue y = p.extend(h, c);
    ASSERT_LT(y, p.hash_space());
    ASSERT_EQ(y, oracle::extend(h, c, 1 << 20));
    ASSERT_EQ(p.peel(y, c), h);
  }
}

TEST(PeelHash, BucketsForExamples) {
  const HashParams p = fixture();
  EXPECT_EQ(p.buckets_for(2560), (std::pair<BucketIndex, BucketIndex>{160, 167}));
  EXPECT_EQ(p.buckets_for(0), (std::pair<BucketIndex, BucketIndex>{0, 7}));
}

TEST(PeelHash, ZeroDisplacementGivesOneBucket) {
  const HashParams p(64, std::vector<std::uint64_t>(16, 0));
  const auto [b1, b2] = p.buckets_for(100);
  EXPECT_EQ(b1, b2);
}

TEST(PeelHash, AlternateBucket) {
  const HashParams p = fixture();
  EXPECT_EQ(p.alternate_bucket(160, 0, true), 167u);
  EXPECT_EQ(p.alternate_bucket(167, 0, false), 160u);
  for (BucketIndex b = 0; b < 1024; b += 13)
    for (unsigned tag = 0; tag < 16; ++tag)
      ASSERT_EQ(p.alternate_bucket(p.alternate_bucket(b, tag, true), tag, false), b);
}

TEST(PeelHash, PositionReproducesHash) {
  const HashParams p(4096, 9);
  std::mt19937_64 rng(6);
  for (int i = 0; i < 10000; ++i) {
    std::vector<Symbol> key(1 + rng() % 12);
    for (auto& s : key) s = static_cast<Symbol>(rng() % 32);
    const HashValue h = p.hash_of(key);
    const auto [b1, b2] = p.buckets_for(h);
    const auto tag = p.tag_of(h);
    ASSERT_EQ(p.hash_at(b1, tag, true), h);
    ASSERT_EQ(p.hash_at(b2, tag, false), h);
  }
}

TEST(PeelHash, DisplacementsAreSeededAndInRange) {
  const HashParams a(1000, 42), b(1000, 42), c(1000, 43);
  EXPECT_TRUE(std::equal(a.displacement().begin(), a.displacement().end(), b.displacement().begin()));
  EXPECT_FALSE(std::equal(a.displacement().begin(), a.displacement().end(), c.displacement().begin()));
  for (const auto m : a.displacement()) EXPECT_LT(m, 1000u);
}

TEST(PeelHash, RejectsBadBucketCounts) {
  EXPECT_THROW(HashParams(63, 1), std::invalid_argument);
  EXPECT_THROW(HashParams(62, 1), std::invalid_argument);
  EXPECT_THROW(HashParams(101, 1), std::invalid_argument);
  EXPECT_THROW(HashParams(std::uint64_t{1} << 32, 1), std::invalid_argument);
  EXPECT_NO_THROW(HashParams(64, 1));
}
