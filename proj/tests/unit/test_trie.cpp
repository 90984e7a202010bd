#include <gtest/gtest.h>

#include <map>
#include <random>

#include "fixture.hpp"
#include "oracles.hpp"

using namespace cuckoo_trie;
using testing_support::Trie;

namespace {

const std::vector<std::string> kFourKeys = {"AB", "ACA", "BBB", "BD"};

void expect_canonical(const Trie& t, const std::vector<std::string>& keys) {
  const auto report = check_index(t.index);
  ASSERT_TRUE(report.ok()) << report.errors.front();
  EXPECT_EQ(report.leaves, keys.size());
  const oracle::ReferenceTrie ref(keys);
  EXPECT_EQ(trie_shape(t.index), ref.shape());
}

std::size_t count_kind(const std::vector<NodeShape>& shape, NodeKind kind) {
  return static_cast<std::size_t>(
      std::count_if(shape.begin(), shape.end(), [&](const NodeShape& n) { return n.kind == kind; }));
}

}  // namespace

TEST(Trie, EmptySearchStopsAtRoot) {
  Trie t;
  const SearchOutcome s = t.index.search(encode("anything"));
  ASSERT_EQ(s.path.size(), 1u);
  EXPECT_EQ(s.matched_symbols, 0u);
  EXPECT_EQ(s.stop, SearchOutcome::Stop::kAbsentChild);
  EXPECT_FALSE(t.index.lookup("anything"));
  EXPECT_FALSE(t.index.first());
  expect_canonical(t, {});
}

TEST(Trie, FirstInsertIsLeafUnderRoot) {
  Trie t;
  ASSERT_EQ(t.insert("AB", 1), InsertResult::kInserted);
  const auto shape = trie_shape(t.index);
  ASSERT_EQ(shape.size(), 2u);
  EXPECT_EQ(shape[1].kind, NodeKind::kLeaf);
  EXPECT_EQ(shape[1].name.size(), 1u);
  const auto first = t.index.first();
  ASSERT_TRUE(first);
  EXPECT_EQ(first->key, "AB");
  EXPECT_FALSE(first->leaf.entry.next_leaf);
  const Entry root = t.index.table().raw_entry(EntryRef{0, 0});
  EXPECT_EQ(root.max_leaf, first->leaf.locator());
}

TEST(Trie, FourKeyFixture) {
  Trie t;
  for (std::size_t i = 0; i < kFourKeys.size(); ++i) t.insert(kFourKeys[i], i);
  expect_canonical(t, kFourKeys);

  const SearchOutcome s = t.index.search(encode("AB"));
  ASSERT_EQ(s.stop, SearchOutcome::Stop::kLeaf);
  EXPECT_EQ(t.store.key_of(s.terminal().node.entry.record), "AB");

  const auto aca = t.index.lookup("ACA");
  ASSERT_TRUE(aca);
  EXPECT_EQ(t.store.key_of(*aca), "ACA");
  EXPECT_FALSE(t.index.lookup("AC"));
  EXPECT_FALSE(t.index.lookup("ACB"));
  EXPECT_FALSE(t.index.lookup("B"));
  for (const auto& k : kFourKeys) EXPECT_TRUE(t.index.lookup(k)) << k;
}

TEST(Trie, LeafSplitBuildsCommonChain) {
  Trie t;
  t.insert("AB");
  t.insert("ACA");
  expect_canonical(t, {"AB", "ACA"});
}

TEST(Trie, DuplicateInsertKeepsFirstRecord) {
  Trie t;
  const RecordRef first = t.store.append("key", 1);
  ASSERT_EQ(t.index.insert("key", first), InsertResult::kInserted);
  EXPECT_EQ(t.index.insert("key", t.store.append("key", 2)), InsertResult::kAlreadyPresent);
  EXPECT_EQ(*t.index.lookup("key"), first);
}

TEST(Trie, SymbolPrefixKeysRejected) {
  // Five bytes encode to exactly eight symbols, so "abcde" is a symbol
  // prefix of "abcdef". Shorter byte prefixes are the caller's to avoid.
  Trie t;
  t.insert("abcde");
  EXPECT_THROW(t.insert("abcdef"), InvalidKeyError);
  EXPECT_THROW(t.insert(""), InvalidKeyError);
  expect_canonical(t, {"abcde"});

  Trie u;
  u.insert("abcdef");
  EXPECT_THROW(u.insert("abcde"), InvalidKeyError);
  expect_canonical(u, {"abcdef"});
}

TEST(Trie, LongKeysUseChainedJumps) {
  Trie t;
  const std::string a(100, 'x');
  std::string b = a;
  b[99] = 'y';
  t.insert(a);
  t.insert(b);
  expect_canonical(t, {a, b});
  // 100 bytes = 160 symbols; 'x' and 'y' differ in the last bit, symbol 159.
  // Symbols 1..158 form the chain below the root's child.
  const auto shape = trie_shape(t.index);
  std::size_t chain = 0;
  for (const auto& n : shape)
    if (n.kind == NodeKind::kJump) {
      EXPECT_LE(n.label.size(), kMaxJump);
      chain += n.label.size();
    }
  EXPECT_EQ(chain, 158u);
  EXPECT_EQ(count_kind(shape, NodeKind::kJump), 16u);
}

TEST(Trie, SearchDivergingInsideJumpStopsAtJump) {
  Trie t;
  const std::string a(40, 'x');
  std::string b = a;
  b[39] = 'y';
  t.insert(a);
  t.insert(b);
  std::string probe = a;
  probe[10] = 'q';
  const SearchOutcome s = t.index.search(encode(probe));
  EXPECT_EQ(s.stop, SearchOutcome::Stop::kJumpMismatch);
  EXPECT_TRUE(s.terminal().node.entry.is_jump());
  EXPECT_LT(s.matched_symbols, encode(probe).size());
  EXPECT_FALSE(t.index.lookup(probe));
}

TEST(Trie, JumpSplitMatchesReference) {
  const std::string a(40, 'x');
  for (std::size_t pos = 2; pos < 38; ++pos) {
    Trie t;
    std::string b = a;
    b[39] = 'y';
    std::string c = a;
    c[pos] = 'q';
    t.insert(a);
    t.insert(b);
    t.insert(c);
    expect_canonical(t, {a, b, c});
    for (const auto& k : {a, b, c}) ASSERT_TRUE(t.index.lookup(k));
  }
}

TEST(Trie, SplitTwoSymbolJumpAtItsFirstSymbol) {
  using namespace std::string_literals;
  // [2,0,0,0] and [2,0,0,16]: a two-symbol jump [0,0] sits below the root's
  // child. [2,28,0,0] diverges at the jump's first symbol.
  Trie t;
  t.insert("\x10\x00"s);
  t.insert("\x10\x01"s);
  const auto before = trie_shape(t.index);
  ASSERT_EQ(count_kind(before, NodeKind::kJump), 1u);
  EXPECT_EQ(before[1].label, (std::vector<Symbol>{0, 0}));
  t.insert("\x17\x00"s);
  expect_canonical(t, {"\x10\x00"s, "\x10\x01"s, "\x17\x00"s});
  // A regular node at the split point and a one-symbol jump below it.
  const auto after = trie_shape(t.index);
  ASSERT_EQ(count_kind(after, NodeKind::kJump), 1u);
  for (const auto& n : after)
    if (n.kind == NodeKind::kJump) EXPECT_EQ(n.label.size(), 1u);
}

TEST(Trie, FindChildExamples) {
  Trie t;
  const std::string a(20, 'x');
  std::string b = a;
  b[19] = 'y';
  t.insert(a);
  t.insert(b);
  const SymbolKey ka = encode(a);
  const auto hashes = t.index.prefix_hashes(ka.symbols());
  ReadContext ctx;
  const BucketImage img = t.index.table().snapshot(0);
  const PathStep root{EntryMatch{{0, 0}, img.entry(0), 0, img.version}, 0};

  // Bitmap bit clear: no probe needed.
  const SymbolKey other = encode("\x01");
  const auto other_hashes = t.index.prefix_hashes(other.symbols());
  EXPECT_EQ(t.index.find_child(root, 0, other, 0, other_hashes, ctx).status,
            TrieIndex::ChildStatus::kNull);

  const auto first = t.index.find_child(root, 0, ka, 0, hashes, ctx);
  ASSERT_EQ(first.status, TrieIndex::ChildStatus::kChild);
  ASSERT_TRUE(first.child.entry.is_jump());
  const std::size_t reads = ctx.reads().size();
  const PathStep jump{first.child, 1};
  const auto inside = t.index.find_child(jump, 0, ka, 1, hashes, ctx);
  EXPECT_EQ(inside.status, TrieIndex::ChildStatus::kSameJump);
  EXPECT_EQ(inside.depth_in_jump, 1u);
  EXPECT_EQ(ctx.reads().size(), reads);  // no table probe inside a jump
}

TEST(Trie, DeleteRoundTrip) {
  Trie t;
  t.insert("hello");
  EXPECT_TRUE(t.index.erase("hello"));
  EXPECT_FALSE(t.index.lookup("hello"));
  EXPECT_FALSE(t.index.erase("hello"));
  EXPECT_FALSE(t.index.erase("other"));
  expect_canonical(t, {});
  EXPECT_EQ(t.index.table().occupied_slots(), 1u);  // only the root
}

TEST(Trie, DeleteSiblingCollapsesToSurvivor) {
  Trie t;
  for (const auto& k : kFourKeys) t.insert(k);
  ASSERT_TRUE(t.index.erase("BBB"));
  expect_canonical(t, {"AB", "ACA", "BD"});
  ASSERT_TRUE(t.index.erase("AB"));
  expect_canonical(t, {"ACA", "BD"});
}

TEST(Trie, DeleteMaximumRepairsAncestors) {
  Trie t;
  const std::vector<std::string> keys = {"aa", "ab", "ac", "ba"};
  for (const auto& k : keys) t.insert(k);
  ASSERT_TRUE(t.index.erase("ac"));
  expect_canonical(t, {"aa", "ab", "ba"});
  const auto pred = t.index.predecessor("b");
  ASSERT_TRUE(pred);
  EXPECT_EQ(pred->key, "ab");
}

TEST(Trie, DeleteMergesChainsAcrossJumps) {
  const std::string a(60, 'x');
  std::string b = a, c = a;
  b[59] = 'y';
  c[25] = 'q';
  Trie t;
  for (const auto& k : {a, b, c}) t.insert(k);
  ASSERT_TRUE(t.index.erase(c));
  expect_canonical(t, {a, b});
  t.insert(c);
  ASSERT_TRUE(t.index.erase(a));
  expect_canonical(t, {b, c});
}

TEST(Trie, MatchesReferenceAfterEveryOperation) {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    Trie t;
    const auto pool = testing_support::terminated_keys(120, 6, seed, 3);
    std::map<std::string, bool> live;
    std::mt19937_64 rng(seed);
    for (int op = 0; op < 800; ++op) {
      const std::string& k = pool[rng() % pool.size()];
      if (rng() % 3 != 0) {
        const bool fresh = !live.count(k);
        ASSERT_EQ(t.insert(k) == InsertResult::kInserted, fresh);
        live[k] = true;
      } else {
        ASSERT_EQ(t.index.erase(k), live.erase(k) == 1);
      }
      std::vector<std::string> keys;
      for (const auto& [key, _] : live) keys.push_back(key);
      ASSERT_NO_FATAL_FAILURE(expect_canonical(t, keys)) << "seed " << seed << " op " << op;
    }
  }
}

TEST(Trie, LookupMatchesReferenceMap) {
  Trie t(testing_support::options(1 << 14, 3));
  std::map<std::string, RecordRef> ref;
  const auto pool = testing_support::terminated_keys(4000, 32, 7, 256 - 1);
  std::mt19937_64 rng(7);
  for (int op = 0; op < 60000; ++op) {
    const std::string& k = pool[rng() % pool.size()];
    switch (rng() % 3) {
      case 0: {
        const RecordRef r = t.store.append(k, op);
        const bool fresh = t.index.insert(k, r) == InsertResult::kInserted;
        ASSERT_EQ(fresh, !ref.count(k));
        if (fresh) ref[k] = r;
        break;
      }
      case 1: {
        const auto got = t.index.lookup(k);
        const auto it = ref.find(k);
        ASSERT_EQ(got.has_value(), it != ref.end());
        if (got) ASSERT_EQ(*got, it->second);
        break;
      }
      default:
        ASSERT_EQ(t.index.erase(k), ref.erase(k) == 1);
    }
  }
  const auto report = check_index(t.index);
  ASSERT_TRUE(report.ok()) << report.errors.front();
  EXPECT_EQ(report.leaves, ref.size());
}

TEST(Trie, TableFullLeavesIndexUnchanged) {
  Trie t(testing_support::options(64, 5));
  const auto keys = testing_support::random_fixed_keys(2000, 8, 5);
  std::vector<std::string> stored;
  bool full = false;
  for (const auto& k : keys) {
    try {
      t.insert(k);
      stored.push_back(k);
    } catch (const TableFullError& e) {
      full = true;
      EXPECT_NE(std::string(e.what()).find("capacity"), std::string::npos);
      EXPECT_FALSE(t.index.lookup(k));
      break;
    }
  }
  ASSERT_TRUE(full);
  expect_canonical(t, stored);
  for (const auto& k : stored) ASSERT_TRUE(t.index.lookup(k));
}

TEST(Trie, NodesPerRandomKey) {
  Trie t(testing_support::options(1 << 16, 9));
  const auto keys = testing_support::random_fixed_keys(100000, 8, 9);
  for (const auto& k : keys) t.insert(k);
  const IndexStats st = t.index.stats();
  EXPECT_EQ(st.leaves, keys.size());
  const double per_key = static_cast<double>(st.nodes()) / static_cast<double>(keys.size());
  EXPECT_GE(per_key, 1.15);
  EXPECT_LE(per_key, 1.35);
  EXPECT_EQ(st.memory_bytes, (std::size_t{1} << 16) * 64);
}

TEST(Trie, LocatorsSurviveForcedRelocations) {
  Trie t(testing_support::options(1 << 12, 2));
  const auto keys = testing_support::random_fixed_keys(6000, 8, 2);
  for (const auto& k : keys) t.insert(k);
  const std::size_t moved = t.index.force_relocations(10000, 3);
  EXPECT_EQ(moved, 10000u);
  const auto report = check_index(t.index);
  ASSERT_TRUE(report.ok()) << report.errors.front();
  for (const auto& k : keys) ASSERT_TRUE(t.index.lookup(k));
}
