#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "cuckoo_trie/trie_index.hpp"

namespace cuckoo_trie {

/// Forward iterator over stored keys in byte order, following the leaf list.
///
/// Not a snapshot: keys inserted or erased during iteration may or may not
/// appear, but yielded keys are strictly increasing and any key present for
/// the whole iteration is yielded. Safe to use while other threads write.
class RangeIterator {
 public:
  /// Positions at range_start(start, inclusive). Iteration stops after the
  /// last key <= `end` when an end bound is given.
  RangeIterator(const TrieIndex& index, std::string_view start, bool inclusive = true,
                std::optional<std::string> end = std::nullopt);

  [[nodiscard]] bool valid() const noexcept { return current_.has_value(); }
  [[nodiscard]] std::string_view key() const noexcept { return key_; }
  [[nodiscard]] RecordRef record() const noexcept { return current_->entry.record; }
  void next();

  /// Times the iterator had to re-search from the root.
  [[nodiscard]] std::uint64_t resyncs() const noexcept { return resyncs_; }

 private:
  void seek(std::string_view key, bool inclusive);
  void settle(std::optional<LeafHit> hit);
  void prefetch_successor() const;

  const TrieIndex& index_;
  std::optional<std::string> end_;
  std::optional<EntryMatch> current_;
  std::string_view key_;
  std::uint64_t resyncs_ = 0;
};

}  // namespace cuckoo_trie
