#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cuckoo_trie/record_store.hpp"
#include "cuckoo_trie/trie_index.hpp"

namespace ct_bench {

using ScanResult = std::vector<std::pair<std::string, std::uint64_t>>;

/// Common face of the indexes the driver can run. Values live in records
/// owned by the index adapter; updates change the record, not the index.
class KvIndex {
 public:
  virtual ~KvIndex() = default;
  [[nodiscard]] virtual std::string_view name() const = 0;
  /// False if the key was already present.
  virtual bool insert(std::string_view key, std::uint64_t value) = 0;
  [[nodiscard]] virtual std::optional<std::uint64_t> lookup(std::string_view key) const = 0;
  virtual bool update(std::string_view key, std::uint64_t value) = 0;
  /// Adds `delta` to the record; returns the old value.
  virtual std::optional<std::uint64_t> read_modify_write(std::string_view key,
                                                         std::uint64_t delta) = 0;
  virtual bool erase(std::string_view key) = 0;
  virtual ScanResult scan(std::string_view start, std::size_t count) const = 0;
  /// Bytes of index structure (excluding records).
  [[nodiscard]] virtual std::size_t index_bytes() const = 0;
  [[nodiscard]] virtual std::size_t record_bytes() const = 0;
};

class CuckooTrieKv final : public KvIndex {
 public:
  explicit CuckooTrieKv(const cuckoo_trie::IndexOptions& options)
      : index_(options, store_) {}

  [[nodiscard]] std::string_view name() const override { return "cuckoo-trie"; }
  bool insert(std::string_view key, std::uint64_t value) override;
  [[nodiscard]] std::optional<std::uint64_t> lookup(std::string_view key) const override;
  bool update(std::string_view key, std::uint64_t value) override;
  std::optional<std::uint64_t> read_modify_write(std::string_view key,
                                                 std::uint64_t delta) override;
  bool erase(std::string_view key) override { return index_.erase(key); }
  ScanResult scan(std::string_view start, std::size_t count) const override;
  [[nodiscard]] std::size_t index_bytes() const override {
    return index_.table().memory_bytes();
  }
  [[nodiscard]] std::size_t record_bytes() const override { return store_.memory_bytes(); }

  [[nodiscard]] const cuckoo_trie::TrieIndex& index() const { return index_; }

 private:
  cuckoo_trie::RecordStore store_;
  cuckoo_trie::TrieIndex index_;
};

/// std::map behind a reader/writer lock.
class ReferenceKv final : public KvIndex {
 public:
  [[nodiscard]] std::string_view name() const override { return "reference"; }
  bool insert(std::string_view key, std::uint64_t value) override;
  [[nodiscard]] std::optional<std::uint64_t> lookup(std::string_view key) const override;
  bool update(std::string_view key, std::uint64_t value) override;
  std::optional<std::uint64_t> read_modify_write(std::string_view key,
                                                 std::uint64_t delta) override;
  bool erase(std::string_view key) override;
  ScanResult scan(std::string_view start, std::size_t count) const override;
  [[nodiscard]] std::size_t index_bytes() const override { return 0; }
  [[nodiscard]] std::size_t record_bytes() const override { return 0; }

 private:
  mutable std::shared_mutex mutex_;
  std::map<std::string, std::uint64_t, std::less<>> map_;
};

enum class IndexChoice { kCuckooTrie, kReference };

std::unique_ptr<KvIndex> make_index(IndexChoice choice,
                                    const cuckoo_trie::IndexOptions& options);

}  // namespace ct_bench
