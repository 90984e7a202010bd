#include <gtest/gtest.h>

#include <atomic>
#include <map>
#include <random>
#include <thread>

#include "cuckoo_trie/bucket_table.hpp"

using namespace cuckoo_trie;

namespace {

// S = 1024, M[0] = 7, M[15] = 0 (tag 15 maps both choices to one bucket).
HashParams fixture() {
  std::vector<std::uint64_t> m(16);
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = 7 + 31 * i;
  m[15] = 0;
  return HashParams(1024, m);
}

Entry leaf(Symbol last, Color parent = 0, RecordRef record = 0) {
  Entry e;
  e.kind = NodeKind::kLeaf;
  e.last_symbol = last;
  e.parent_color = parent;
  e.record = record;
  return e;
}

}  // namespace

TEST(BucketTable, EmptyTableFindsNothing) {
  BucketTable t(fixture());
  ReadContext ctx;
  EXPECT_TRUE(t.entries_for(2560, ctx).empty());
  EXPECT_FALSE(t.resolve_locator(Locator::of(2560, 0)));
  EXPECT_FALSE(t.resolve_locator(Locator::null()));
  EXPECT_EQ(t.occupied_slots(), 0u);
  EXPECT_EQ(t.memory_bytes(), 1024u * 64);
}

TEST(BucketTable, FirstPlacementIsPrimaryWithColorZero) {
  BucketTable t(fixture());
  LockSet locks(t);
  const EntryMatch m = t.insert_entry(2560, leaf(5), locks);
  locks.release();
  EXPECT_EQ(m.ref.bucket, 160u);
  EXPECT_TRUE(m.entry.is_primary);
  EXPECT_EQ(m.entry.color, 0);
  const auto all = t.entries_for(2560);
  ASSERT_EQ(all.size(), 1u);
  EXPECT_EQ(all[0].ref, m.ref);
  EXPECT_EQ(all[0].hash, 2560u);
}

TEST(BucketTable, SameHashGetsDistinctColors) {
  BucketTable t(fixture());
  LockSet locks(t);
  const auto a = t.insert_entry(2560, leaf(5, 0), locks);
  const auto b = t.insert_entry(2560, leaf(5, 1), locks);
  locks.release();
  EXPECT_EQ(a.entry.color, 0);
  EXPECT_EQ(b.entry.color, 1);
  EXPECT_EQ(t.entries_for(2560).size(), 2u);
  EXPECT_EQ(t.search_by_color(2560, 5, 1)->ref, b.ref);
}

TEST(BucketTable, EightSameHashEntriesExhaustColors) {
  BucketTable t(fixture());
  LockSet locks(t);
  for (Color c = 0; c < kColorCount; ++c)
    EXPECT_EQ(t.insert_entry(2560, leaf(5, c), locks).entry.color, c);
  EXPECT_THROW(t.insert_entry(2560, leaf(5, 0), locks), TableFullError);
}

TEST(BucketTable, SearchByParentVerifiesSymbolAndParentColor) {
  BucketTable t(fixture());
  LockSet locks(t);
  const HashValue h = t.params().extend(0, 5);
  t.insert_entry(h, leaf(5, 3), locks);
  locks.release();
  EXPECT_TRUE(t.search_by_parent(h, 5, 3));
  EXPECT_FALSE(t.search_by_parent(h, 5, 2));
  EXPECT_FALSE(t.search_by_parent(h, 6, 3));
  EXPECT_TRUE(t.search_by_color(h, 5, 0));
  EXPECT_FALSE(t.search_by_color(h, 5, 1));
}

TEST(BucketTable, ViaJumpEntriesAreInvisibleToParentSearch) {
  BucketTable t(fixture());
  LockSet locks(t);
  Entry e = leaf(5, 0);
  e.via_jump = true;
  t.insert_entry(2560, e, locks);
  locks.release();
  EXPECT_FALSE(t.search_by_parent(2560, 5, 0));
  EXPECT_TRUE(t.search_by_color(2560, 5, 0));
}

TEST(BucketTable, FullBucketForcesRelocation) {
  BucketTable t(fixture());
  LockSet locks(t);
  std::map<HashValue, Locator> shadow;
  for (HashValue tag = 0; tag < 4; ++tag) {
    const HashValue h = 160 * 16 + tag;
    shadow[h] = t.insert_entry(h, leaf(1, 0, tag), locks).locator();
  }
  EXPECT_EQ(t.relocation_count(), 0u);
  const HashValue fifth = 160 * 16 + 15;  // both choices are bucket 160
  const EntryMatch m = t.insert_entry(fifth, leaf(1, 0, 15), locks);
  shadow[fifth] = m.locator();
  locks.release();
  EXPECT_EQ(m.ref.bucket, 160u);
  EXPECT_GE(t.relocation_count(), 1u);
  for (const auto& [h, loc] : shadow) {
    const auto found = t.resolve_locator(loc);
    ASSERT_TRUE(found) << h;
    EXPECT_EQ(found->hash, h);
    EXPECT_EQ(found->entry.tag, h % 16);
    EXPECT_EQ(found->entry.record, h % 16);
    if (h % 16 != 15) EXPECT_EQ(found->ref.bucket == 160, found->entry.is_primary);
  }
}

TEST(BucketTable, RelocateTwiceRestoresPosition) {
  BucketTable t(fixture());
  LockSet locks(t);
  ReadContext own(ReadContext::Mode::kExclusive);  // optimistic reads would wait on our locks
  const EntryMatch m = t.insert_entry(2560, leaf(5, 2), locks);
  const auto moved = t.relocate_one(m.ref, locks);
  ASSERT_TRUE(moved);
  EXPECT_EQ(*moved, 167u);
  const auto there = t.resolve_locator(m.locator(), own);
  ASSERT_TRUE(there);
  EXPECT_FALSE(there->entry.is_primary);
  EXPECT_TRUE(t.search_by_parent(2560, 5, 2, own));
  ASSERT_TRUE(t.relocate_one(there->ref, locks));
  const auto back = t.resolve_locator(m.locator(), own);
  EXPECT_EQ(back->ref.bucket, 160u);
  EXPECT_TRUE(back->entry.is_primary);
}

TEST(BucketTable, LocatorSurvivesManyRelocations) {
  BucketTable t(fixture());
  LockSet locks(t);
  ReadContext own(ReadContext::Mode::kExclusive);
  const EntryMatch m = t.insert_entry(2560, leaf(5, 0, 99), locks);
  for (int i = 0; i < 100; ++i) {
    const auto cur = t.resolve_locator(m.locator(), own);
    ASSERT_TRUE(cur);
    ASSERT_TRUE(t.relocate_one(cur->ref, locks));
  }
  locks.release();
  EXPECT_EQ(t.resolve_locator(m.locator())->entry.record, 99u);
}

TEST(BucketTable, PinnedSlotNeverMoves) {
  BucketTable t(fixture());
  LockSet locks(t);
  Entry root;
  root.kind = NodeKind::kInternal;
  t.place_pinned(root, locks);
  EXPECT_FALSE(t.relocate_one(EntryRef{0, 0}, locks));
  // Fill bucket 0 and its neighbours with tag-15 entries whose two choices coincide.
  for (int i = 0; i < 3; ++i) t.insert_entry(15, leaf(1, static_cast<Color>(i)), locks);
  EXPECT_THROW(t.insert_entry(15, leaf(1, 3), locks), TableFullError);
  EXPECT_EQ(t.raw_entry(EntryRef{0, 0}).kind, NodeKind::kInternal);
}

TEST(BucketTable, FillTo85PercentKeepsEverythingFindable) {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    BucketTable t(4096, seed);
    std::mt19937_64 rng(seed);
    std::vector<std::pair<Locator, RecordRef>> shadow;
    LockSet locks(t);
    const std::size_t target = 4096 * 4 * 85 / 100;
    for (std::size_t i = 0; i < target; ++i) {
      const HashValue h = rng() % t.params().hash_space();
      shadow.emplace_back(t.insert_entry(h, leaf(h % 32, 0, i), locks).locator(), i);
      if (locks.size() > 64) locks.release();
    }
    locks.release();
    EXPECT_EQ(t.occupied_slots(), target);
    for (const auto& [loc, rec] : shadow) {
      const auto m = t.resolve_locator(loc);
      ASSERT_TRUE(m);
      ASSERT_EQ(m->entry.record, rec);
    }
    // Every entry's position and tag reproduce its hash in the stated role.
    t.for_each_occupied([&](EntryRef ref, const Entry& e) {
      const auto [b1, b2] = t.params().buckets_for(t.hash_at(ref, e));
      EXPECT_EQ(e.is_primary ? b1 : b2, ref.bucket);
    });
  }
}

TEST(BucketTable, LockBucketsUncontended) {
  BucketTable t(1024, 1);
  const std::vector<BucketIndex> bs{3, 9, 40};
  std::vector<std::uint32_t> vs;
  for (auto b : bs) vs.push_back(t.version(b));
  ASSERT_TRUE(t.lock_buckets(bs, vs));
  for (std::size_t i = 0; i < bs.size(); ++i) EXPECT_EQ(t.version(bs[i]), vs[i] + 1);
  t.unlock_buckets(bs);
  for (std::size_t i = 0; i < bs.size(); ++i) EXPECT_EQ(t.version(bs[i]), vs[i] + 2);
}

TEST(BucketTable, LockBucketsStaleVersionRollsBack) {
  BucketTable t(1024, 1);
  t.lock_bucket(40);
  t.unlock_bucket(40);  // bucket 40 is now at version 2
  const std::vector<BucketIndex> bs{3, 9, 40};
  const std::vector<std::uint32_t> vs{0, 0, 0};
  EXPECT_FALSE(t.lock_buckets(bs, vs));
  for (auto b : bs) EXPECT_EQ(t.version(b) % 2, 0u);
}

TEST(BucketTable, ReaderWaitsForParkedWriter) {
  BucketTable t(fixture());
  LockSet setup(t);
  const EntryMatch m = t.insert_entry(2560, leaf(5, 0, 1), setup);
  setup.release();

  LockSet writer(t);
  writer.acquire(m.ref.bucket);
  std::atomic<bool> done{false};
  RecordRef seen = 0;
  std::thread reader([&] {
    seen = t.snapshot(m.ref.bucket).entry(m.ref.slot).record;
    done = true;
  });
  std::this_thread::sleep_for(std::chrono::milliseconds(50));
  EXPECT_FALSE(done.load());
  Entry e = m.entry;
  e.record = 2;
  t.write_entry(m.ref, e, writer);
  writer.release();
  reader.join();
  EXPECT_EQ(seen, 2u);
}

TEST(BucketTable, SnapshotsNeverMixTwoWrites) {
  BucketTable t(1024, 1);
  const BucketIndex b = 77;
  std::atomic<bool> stop{false};
  std::thread writer([&] {
    for (RecordRef v = 1; !stop.load(); ++v) {
      {
        LockSet locks(t);
        for (std::uint8_t s = 0; s < kSlotsPerBucket; ++s)
          t.write_entry(EntryRef{b, s}, leaf(s, 0, v & kMaxRecordRef), locks);
      }
      std::this_thread::yield();
    }
  });
  for (int i = 0; i < 20000; ++i) {
    const BucketImage img = t.snapshot(b);
    const RecordRef first = img.entry(0).record;
    for (std::uint8_t s = 1; s < kSlotsPerBucket; ++s) ASSERT_EQ(img.entry(s).record, first);
    ASSERT_EQ(img.version % 2, 0u);
  }
  stop = true;
  writer.join();
}

TEST(BucketTable, ValidateDetectsIntermediateWrite) {
  BucketTable t(fixture());
  ReadContext ctx;
  (void)t.entries_for(2560, ctx);
  EXPECT_TRUE(ctx.validate(t));
  LockSet locks(t);
  t.insert_entry(2560, leaf(5), locks);
  locks.release();
  EXPECT_FALSE(ctx.validate(t));
}

TEST(BucketTable, DumpFormat) {
  BucketTable t(fixture());
  LockSet locks(t);
  t.insert_entry(2560, leaf(5, 3), locks);
  locks.release();
  EXPECT_EQ(t.dump(), "160 0 leaf 0 1 5 0 3\n");
}
