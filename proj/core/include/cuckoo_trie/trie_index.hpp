#pragma once

#include <cstddef>
#include <cstdint>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cuckoo_trie/bucket_table.hpp"
#include "cuckoo_trie/entry.hpp"
#include "cuckoo_trie/key_codec.hpp"
#include "cuckoo_trie/peel_hash.hpp"
#include "cuckoo_trie/record_store.hpp"

namespace cuckoo_trie {

struct IndexOptions {
  /// Number of 64-byte buckets. Fixed for the life of the index.
  std::uint64_t bucket_count = std::uint64_t{1} << 16;
  std::uint64_t seed = 0;
  /// How many prefix levels ahead of the descent have their buckets prefetched.
  unsigned prefetch_depth = 5;
  bool prefetch = true;
  /// Test hook: skip subtree-max maintenance so differential harnesses can
  /// prove they detect it.
  bool fault_skip_max_leaf_update = false;
};

enum class InsertResult { kInserted, kAlreadyPresent };

/// One distinct node visited by a search.
struct PathStep {
  EntryMatch node;
  std::uint32_t depth = 0;  // length of the node's name, in symbols
};

struct SearchOutcome {
  enum class Stop {
    kLeaf,          // reached a leaf
    kAbsentChild,   // regular node without a child for the next symbol
    kJumpMismatch,  // jump label disagrees with the key
    kKeyExhausted,  // ran out of key symbols at a non-leaf
  };

  std::vector<PathStep> path;  // root first, terminal last
  std::uint32_t depth_in_jump = 0;
  std::uint32_t matched_symbols = 0;
  Stop stop = Stop::kAbsentChild;
  std::uint32_t restarts = 0;

  [[nodiscard]] const PathStep& terminal() const { return path.back(); }
};

/// A stored key located by a read operation.
struct LeafHit {
  EntryMatch leaf;
  std::string_view key;
  RecordRef record = 0;
};

struct IndexStats {
  std::size_t leaves = 0;
  std::size_t internal_nodes = 0;
  std::size_t jump_nodes = 0;
  std::size_t occupied_slots = 0;
  std::uint64_t bucket_count = 0;
  /// Bytes of the bucket array: bucket_count * 64.
  std::size_t memory_bytes = 0;
  std::uint64_t relocations = 0;

  [[nodiscard]] std::size_t nodes() const noexcept {
    return leaves + internal_nodes + jump_nodes;
  }
  [[nodiscard]] double load_factor() const noexcept {
    return bucket_count == 0
               ? 0.0
               : static_cast<double>(occupied_slots) /
                     static_cast<double>(bucket_count * kSlotsPerBucket);
  }
};

class RangeIterator;

/// Ordered index over byte-string keys: a path-compressed trie of unique key
/// prefixes stored implicitly in a bucketized cuckoo hash table.
///
/// Keys must be pairwise prefix-free as byte strings. Leaves hold record
/// references; the full key is fetched through the KeyResolver when a lookup
/// needs to confirm a match.
///
/// Thread safety: lookups, searches and scans may run concurrently with each
/// other and with writers. Readers take no locks; they validate bucket
/// versions and restart on conflict. Writers are serialized with each other
/// and lock every bucket they modify until the operation completes.
class TrieIndex {
 public:
  TrieIndex(const IndexOptions& options, const KeyResolver& keys);
  TrieIndex(const TrieIndex&) = delete;
  TrieIndex& operator=(const TrieIndex&) = delete;

  [[nodiscard]] std::optional<RecordRef> lookup(std::string_view key) const;

  /// Throws InvalidKeyError if `key` and a stored key are prefixes of one
  /// another, TableFullError if the table has no room (the index is left
  /// unchanged).
  InsertResult insert(std::string_view key, RecordRef record);

  /// Returns false if the key is not stored.
  bool erase(std::string_view key);

  /// Descends as far as `key` leads. Never returns an inconsistent path.
  [[nodiscard]] SearchOutcome search(const SymbolKey& key) const;

  /// Largest stored key strictly below `key`. The empty key is allowed here
  /// and in range_start/scan, where it sorts before every stored key.
  [[nodiscard]] std::optional<LeafHit> predecessor(std::string_view key) const;
  /// Smallest stored key >= `key` (or > `key` when !inclusive).
  [[nodiscard]] std::optional<LeafHit> range_start(std::string_view key,
                                                   bool inclusive = true) const;
  /// Up to `count` consecutive (key, record) pairs starting at range_start(key).
  [[nodiscard]] std::vector<std::pair<std::string_view, RecordRef>> scan(
      std::string_view key, std::size_t count) const;
  /// Leaf holding the smallest key.
  [[nodiscard]] std::optional<LeafHit> first() const;

  /// Full-table walk; only meaningful when no writer is active.
  [[nodiscard]] IndexStats stats() const;

  [[nodiscard]] const BucketTable& table() const noexcept { return table_; }
  [[nodiscard]] const IndexOptions& options() const noexcept { return options_; }
  [[nodiscard]] const KeyResolver& keys() const noexcept { return keys_; }
  void set_prefetch(bool enabled) noexcept { options_.prefetch = enabled; }

  /// Moves randomly chosen entries to their alternate buckets until `count`
  /// moves succeeded or too many attempts failed. Returns the moves made.
  std::size_t force_relocations(std::size_t count, std::uint64_t seed);

  /// Reads under the caller's context. Exposed for tests and tooling.
  enum class ChildStatus { kNull, kFail, kSameJump, kChild };
  struct ChildResult {
    ChildStatus status = ChildStatus::kNull;
    EntryMatch child;
    std::uint32_t depth_in_jump = 0;
  };
  /// One descent step from `node`, whose name is key[:position - depth_in_jump].
  /// `hashes[j]` must hold the hash of key[:j].
  [[nodiscard]] ChildResult find_child(const PathStep& node, std::uint32_t depth_in_jump,
                                       const SymbolKey& key, std::size_t position,
                                       std::span<const HashValue> hashes,
                                       ReadContext& ctx) const;

  /// Hashes of every prefix of `key`, from the empty prefix to the full key.
  [[nodiscard]] std::vector<HashValue> prefix_hashes(std::span<const Symbol> key) const;

 private:
  friend class RangeIterator;
  struct PreparedChain;

  // Read side. All return false when a concurrent conflict forces a restart.
  bool locate(const SymbolKey& key, std::span<const HashValue> hashes, ReadContext& ctx,
              SearchOutcome& out) const;
  bool max_leaf_of(const EntryMatch& node, ReadContext& ctx,
                   std::optional<EntryMatch>& out) const;
  bool ascend(const std::vector<PathStep>& path, std::size_t from, const SymbolKey& key,
              ReadContext& ctx, std::optional<EntryMatch>& out) const;
  bool predecessor_of(const SearchOutcome& outcome, const SymbolKey& key,
                      std::string_view raw_key, ReadContext& ctx,
                      std::optional<EntryMatch>& out) const;
  bool read_head(ReadContext& ctx, std::optional<EntryMatch>& out) const;
  bool follow_next(const EntryMatch& leaf, ReadContext& ctx,
                   std::optional<EntryMatch>& out) const;
  bool range_start_once(const SymbolKey& key, std::span<const HashValue> hashes,
                        std::string_view raw_key, bool inclusive, ReadContext& ctx,
                        std::optional<EntryMatch>& out) const;
  [[nodiscard]] LeafHit hit(const EntryMatch& leaf) const;

  // Write side; caller holds write_mutex_.
  [[nodiscard]] EntryMatch find_node(Locator id) const;
  template <typename F>
  void update_node(Locator id, LockSet& locks, F&& mutate);
  void set_head(Locator head, LockSet& locks);
  [[nodiscard]] Locator head_locator() const;
  void lock_path(const SearchOutcome& outcome, LockSet& locks);
  void redirect_leaf(Locator from, Locator to, const std::optional<EntryMatch>& pred,
                     std::span<const PathStep> ancestors, LockSet& locks);
  /// `parent_path`, when given, is the path to the new leaf's parent.
  void link_new_leaf(Locator leaf, const SymbolKey& key, std::span<const HashValue> hashes,
                     LockSet& locks, const std::vector<PathStep>* parent_path = nullptr);
  void remove_node(Locator id, LockSet& locks);

  Locator create(HashValue h, const Entry& proto, LockSet& locks,
                 std::vector<Locator>& created);
  PreparedChain prepare_chain(std::span<const Symbol> names, std::size_t top_depth,
                              std::size_t length, Locator bottom, Locator max_leaf,
                              LockSet& locks, std::vector<Locator>& created);
  void commit_chain(const PreparedChain& chain, std::optional<EntryMatch> replace,
                    Color top_parent_color, bool top_via_jump, LockSet& locks);

  void insert_under(const SearchOutcome& s, const SymbolKey& key,
                    std::span<const HashValue> hashes, RecordRef record, LockSet& locks);
  void insert_split_leaf(const SearchOutcome& s, const SymbolKey& key,
                         std::span<const HashValue> hashes, RecordRef record,
                         const SymbolKey& other, LockSet& locks);
  void insert_split_jump(const SearchOutcome& s, const SymbolKey& key,
                         std::span<const HashValue> hashes, RecordRef record,
                         LockSet& locks);

  IndexOptions options_;
  const KeyResolver& keys_;
  BucketTable table_;
  std::mutex write_mutex_;
};

}  // namespace cuckoo_trie
