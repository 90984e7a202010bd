#pragma once

#include <array>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <mutex>
#include <string_view>

#include "cuckoo_trie/entry.hpp"

namespace cuckoo_trie {

/// Maps a leaf's record reference back to the full key it was inserted with.
class KeyResolver {
 public:
  virtual ~KeyResolver() = default;
  [[nodiscard]] virtual std::string_view key_of(RecordRef ref) const = 0;
  /// Hint that the record will be read soon.
  virtual void prefetch(RecordRef) const noexcept {}
};

/// Append-only arena of (key, 64-bit value) records.
///
/// Records never move or disappear, so references stay valid for the life of
/// the store and concurrent readers need no synchronization beyond the
/// release/acquire handoff of the reference itself. Values are updated in
/// place with atomic stores.
class RecordStore final : public KeyResolver {
 public:
  RecordStore() = default;
  RecordStore(const RecordStore&) = delete;
  RecordStore& operator=(const RecordStore&) = delete;
  ~RecordStore() override;

  /// Thread-safe. Keys are limited to 65535 bytes.
  RecordRef append(std::string_view key, std::uint64_t value);

  [[nodiscard]] std::string_view key_of(RecordRef ref) const override;
  void prefetch(RecordRef ref) const noexcept override;

  [[nodiscard]] std::uint64_t value(RecordRef ref) const;
  void set_value(RecordRef ref, std::uint64_t value);
  /// Atomically adds `delta`; returns the previous value.
  std::uint64_t add_value(RecordRef ref, std::uint64_t delta);

  [[nodiscard]] std::size_t size() const noexcept {
    return count_.load(std::memory_order_relaxed);
  }
  /// Bytes reserved by the arena's chunks.
  [[nodiscard]] std::size_t memory_bytes() const noexcept;

 private:
  static constexpr std::size_t kChunkBits = 22;  // 4 MiB chunks
  static constexpr std::size_t kChunkSize = std::size_t{1} << kChunkBits;
  static constexpr std::size_t kMaxChunks = std::size_t{1} << 16;

  [[nodiscard]] std::byte* locate(RecordRef ref) const;

  mutable std::mutex append_mutex_;
  std::unique_ptr<std::atomic<std::byte*>[]> chunks_ =
      std::make_unique<std::atomic<std::byte*>[]>(kMaxChunks);
  std::size_t chunk_count_ = 0;
  std::size_t tail_ = 0;  // offset in the last chunk
  std::atomic<std::size_t> count_{0};
};

}  // namespace cuckoo_trie
