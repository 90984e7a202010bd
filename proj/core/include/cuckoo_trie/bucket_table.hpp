#pragma once

#include <array>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "cuckoo_trie/entry.hpp"
#include "cuckoo_trie/peel_hash.hpp"

namespace cuckoo_trie {

/// Raised when an insertion cannot find room. The table never resizes.
class TableFullError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct EntryRef {
  BucketIndex bucket = 0;
  std::uint8_t slot = 0;

  friend bool operator==(const EntryRef&, const EntryRef&) = default;
};

struct EntryMatch {
  EntryRef ref;
  Entry entry;
  HashValue hash = 0;
  std::uint32_t version = 0;  // version of the bucket image it was read from

  [[nodiscard]] Locator locator() const noexcept { return Locator::of(hash, entry.color); }
};

inline constexpr std::size_t kBucketPayloadBytes = kSlotsPerBucket * kEntryBytes;

/// A consistent copy of one bucket's entries.
struct BucketImage {
  std::uint32_t version = 0;
  std::array<std::byte, kBucketPayloadBytes> bytes{};

  [[nodiscard]] std::span<const std::byte, kEntryBytes> raw_slot(std::size_t slot) const {
    return std::span<const std::byte, kEntryBytes>(bytes.data() + slot * kEntryBytes,
                                                   kEntryBytes);
  }
  [[nodiscard]] Entry entry(std::size_t slot) const { return Entry::unpack(raw_slot(slot)); }
  [[nodiscard]] Entry header(std::size_t slot) const {
    return Entry::unpack_header(raw_slot(slot));
  }
};

class BucketTable;

/// Tracks the bucket versions an optimistic reader observed so the whole read
/// can be validated at the end. In exclusive mode (the writer reading its own
/// state) buckets are read directly and nothing is recorded.
class ReadContext {
 public:
  enum class Mode { kOptimistic, kExclusive };

  explicit ReadContext(Mode mode = Mode::kOptimistic) : mode_(mode) { reads_.reserve(32); }

  [[nodiscard]] bool exclusive() const noexcept { return mode_ == Mode::kExclusive; }
  void clear() noexcept { reads_.clear(); }
  void record(BucketIndex b, std::uint32_t version) { reads_.emplace_back(b, version); }
  [[nodiscard]] std::span<const std::pair<BucketIndex, std::uint32_t>> reads() const noexcept {
    return reads_;
  }
  /// True if every recorded bucket still carries the version seen.
  [[nodiscard]] bool validate(const BucketTable& table) const;

 private:
  Mode mode_;
  std::vector<std::pair<BucketIndex, std::uint32_t>> reads_;
};

class LockSet;

/// Bucketized cuckoo hash table with key elimination.
///
/// Each bucket is one cache line: a 32-bit version/lock word and four packed
/// 15-byte entries. Entries never store their key; a node is identified by
/// (hash, last symbol, parent color) or by (hash, color).
///
/// Bucket `bucket_count()` is an extra anchor bucket that is not reachable by
/// hashing. The trie keeps its leaf-list head there.
class BucketTable {
 public:
  static constexpr unsigned kMaxKicks = 500;

  BucketTable(std::uint64_t bucket_count, std::uint64_t seed);
  explicit BucketTable(HashParams params, std::uint64_t seed = 0);
  BucketTable(const BucketTable&) = delete;
  BucketTable& operator=(const BucketTable&) = delete;

  [[nodiscard]] const HashParams& params() const noexcept { return params_; }
  [[nodiscard]] std::uint64_t bucket_count() const noexcept { return params_.bucket_count(); }
  [[nodiscard]] BucketIndex anchor_bucket() const noexcept { return bucket_count(); }
  [[nodiscard]] std::size_t memory_bytes() const noexcept {
    return bucket_count() * sizeof(Bucket);
  }

  [[nodiscard]] std::uint32_t version(BucketIndex b) const noexcept {
    return buckets_[b].version.load(std::memory_order_acquire);
  }

  /// Runs `f` on a snapshot taken under an even, unchanged version.
  template <typename F>
  auto read_consistent(BucketIndex b, F&& f) const {
    const BucketImage image = snapshot(b);
    return f(image);
  }
  [[nodiscard]] BucketImage snapshot(BucketIndex b) const;
  /// Reads bucket `b` according to the context's mode and records it.
  [[nodiscard]] BucketImage read(BucketIndex b, ReadContext& ctx) const;

  void prefetch(BucketIndex b) const noexcept {
#ifndef CUCKOO_TRIE_NO_PREFETCH
    __builtin_prefetch(&buckets_[b], 0, 3);
#else
    (void)b;
#endif
  }

  [[nodiscard]] std::vector<EntryMatch> entries_for(HashValue h, ReadContext& ctx) const;
  [[nodiscard]] std::optional<EntryMatch> search_by_parent(HashValue h, Symbol last_symbol,
                                                           Color parent_color,
                                                           ReadContext& ctx) const;
  [[nodiscard]] std::optional<EntryMatch> search_by_color(HashValue h, Symbol last_symbol,
                                                          Color color,
                                                          ReadContext& ctx) const;
  [[nodiscard]] std::optional<EntryMatch> resolve_locator(Locator loc, ReadContext& ctx) const;

  // Standalone optimistic reads; each call is individually consistent.
  [[nodiscard]] std::vector<EntryMatch> entries_for(HashValue h) const;
  [[nodiscard]] std::optional<EntryMatch> search_by_parent(HashValue h, Symbol last_symbol,
                                                           Color parent_color) const;
  [[nodiscard]] std::optional<EntryMatch> search_by_color(HashValue h, Symbol last_symbol,
                                                          Color color) const;
  [[nodiscard]] std::optional<EntryMatch> resolve_locator(Locator loc) const;

  /// Locks every bucket in `buckets` (ascending, duplicate-free) provided its
  /// version still equals the matching entry of `expected`. On conflict all
  /// locks taken so far are rolled back and false is returned.
  [[nodiscard]] bool lock_buckets(std::span<const BucketIndex> buckets,
                                  std::span<const std::uint32_t> expected);
  /// Releases locks taken by lock_buckets; each version ends at expected + 2.
  void unlock_buckets(std::span<const BucketIndex> buckets);
  /// Spins until the bucket is unlocked, then locks it.
  void lock_bucket(BucketIndex b);
  void unlock_bucket(BucketIndex b);

  // --- Writer side. Buckets touched are locked through `locks` and stay
  // locked until the LockSet releases them.

  /// Places a node with hash `h`. Assigns tag, primary flag and the lowest
  /// color unused among same-hash entries. May relocate other entries.
  /// Throws TableFullError when no room can be found.
  EntryMatch insert_entry(HashValue h, Entry proto, LockSet& locks);
  /// Moves `victim` to a free slot in its alternate bucket. Returns the
  /// destination bucket, or nullopt if that bucket is full.
  std::optional<BucketIndex> relocate_one(EntryRef victim, LockSet& locks);
  void write_entry(EntryRef ref, const Entry& e, LockSet& locks);
  void clear_entry(EntryRef ref, LockSet& locks);
  /// Writer-side direct read.
  [[nodiscard]] Entry raw_entry(EntryRef ref) const;
  [[nodiscard]] BucketImage raw_image(BucketIndex b) const;

  /// Places `e` at bucket 0, slot 0 and excludes that slot from relocation.
  /// Only valid for hash 0 (whose primary bucket is 0).
  void place_pinned(Entry e, LockSet& locks);
  [[nodiscard]] static bool is_pinned(EntryRef ref) noexcept {
    return ref.bucket == 0 && ref.slot == 0;
  }

  /// Anchor bucket word access, used for the leaf-list head.
  [[nodiscard]] std::uint64_t anchor_word(const BucketImage& image) const noexcept;
  void write_anchor_word(std::uint64_t value, LockSet& locks);

  [[nodiscard]] std::uint64_t relocation_count() const noexcept {
    return relocations_.load(std::memory_order_relaxed);
  }

  /// Hash of the node stored at `ref`, derived from position and tag.
  [[nodiscard]] HashValue hash_at(EntryRef ref, const Entry& e) const noexcept {
    return params_.hash_at(ref.bucket, e.tag, e.is_primary);
  }

  /// Calls f(EntryRef, const Entry&) for every occupied slot. Not concurrent-safe.
  template <typename F>
  void for_each_occupied(F&& f) const {
    for (BucketIndex b = 0; b < bucket_count(); ++b) {
      const BucketImage img = raw_image(b);
      for (std::uint8_t s = 0; s < kSlotsPerBucket; ++s) {
        const Entry e = img.entry(s);
        if (e.occupied()) f(EntryRef{b, s}, e);
      }
    }
  }

  [[nodiscard]] std::size_t occupied_slots() const;
  /// One line per occupied entry:
  /// bucket slot kind tag primary last_symbol color parent_color
  [[nodiscard]] std::string dump() const;

 private:
  struct alignas(64) Bucket {
    std::atomic<std::uint32_t> version{0};
    std::array<std::atomic<std::uint32_t>, kBucketPayloadBytes / 4> words{};
  };
  static_assert(sizeof(Bucket) == 64);

  // First same-hash entry whose header satisfies `pred`, fully decoded.
  template <typename P>
  std::optional<EntryMatch> find_if(HashValue h, ReadContext& ctx, P&& pred) const;

  void store_image(BucketIndex b, const BucketImage& image);
  void move_entry(EntryRef from, EntryRef to, LockSet& locks);
  [[nodiscard]] std::optional<std::uint8_t> free_slot(BucketIndex b) const;
  [[nodiscard]] std::uint64_t next_random() noexcept;

  HashParams params_;
  std::unique_ptr<Bucket[]> buckets_;
  std::atomic<std::uint64_t> relocations_{0};
  std::uint64_t rng_state_;
  unsigned round_robin_ = 0;
};

/// Buckets held by one writer. Released (version bumped to even) on
/// destruction or release().
class LockSet {
 public:
  explicit LockSet(BucketTable& table) : table_(table) {}
  LockSet(const LockSet&) = delete;
  LockSet& operator=(const LockSet&) = delete;
  ~LockSet() { release(); }

  /// Locks `buckets` (any order, duplicates allowed) if their versions still
  /// match `expected`. Already-held buckets are skipped.
  [[nodiscard]] bool acquire_all(std::span<const BucketIndex> buckets,
                                 std::span<const std::uint32_t> expected);
  void acquire(BucketIndex b);
  [[nodiscard]] bool holds(BucketIndex b) const noexcept;
  [[nodiscard]] std::size_t size() const noexcept { return held_.size(); }
  void release();

 private:
  BucketTable& table_;
  std::vector<BucketIndex> held_;
};

}  // namespace cuckoo_trie
