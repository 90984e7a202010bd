#include "ct_bench/kv_index.hpp"

#include <mutex>

namespace ct_bench {

bool CuckooTrieKv::insert(std::string_view key, std::uint64_t value) {
  if (index_.lookup(key)) return false;
  return index_.insert(key, store_.append(key, value)) == cuckoo_trie::InsertResult::kInserted;
}

std::optional<std::uint64_t> CuckooTrieKv::lookup(std::string_view key) const {
  const auto ref = index_.lookup(key);
  if (!ref) return std::nullopt;
  return store_.value(*ref);
}

bool CuckooTrieKv::update(std::string_view key, std::uint64_t value) {
  const auto ref = index_.lookup(key);
  if (!ref) return false;
  store_.set_value(*ref, value);
  return true;
}

std::optional<std::uint64_t> CuckooTrieKv::read_modify_write(std::string_view key,
                                                             std::uint64_t delta) {
  const auto ref = index_.lookup(key);
  if (!ref) return std::nullopt;
  return store_.add_value(*ref, delta);
}

ScanResult CuckooTrieKv::scan(std::string_view start, std::size_t count) const {
  ScanResult out;
  out.reserve(count);
  for (const auto& [key, ref] : index_.scan(start, count))
    out.emplace_back(std::string(key), store_.value(ref));
  return out;
}

bool ReferenceKv::insert(std::string_view key, std::uint64_t value) {
  std::unique_lock lock(mutex_);
  return map_.emplace(std::string(key), value).second;
}

std::optional<std::uint64_t> ReferenceKv::lookup(std::string_view key) const {
  std::shared_lock lock(mutex_);
  const auto it = map_.find(key);
  if (it == map_.end()) return std::nullopt;
  return it->second;
}

bool ReferenceKv::update(std::string_view key, std::uint64_t value) {
  std::unique_lock lock(mutex_);
  const auto it = map_.find(key);
  if (it == map_.end()) return false;
  it->second = value;
  return true;
}

std::optional<std::uint64_t> ReferenceKv::read_modify_write(std::string_view key,
                                                            std::uint64_t delta) {
  std::unique_lock lock(mutex_);
  const auto it = map_.find(key);
  if (it == map_.end()) return std::nullopt;
  const std::uint64_t old = it->second;
  it->second += delta;
  return old;
}

bool ReferenceKv::erase(std::string_view key) {
  std::unique_lock lock(mutex_);
  const auto it = map_.find(key);
  if (it == map_.end()) return false;
  map_.erase(it);
  return true;
}

ScanResult ReferenceKv::scan(std::string_view start, std::size_t count) const {
  std::shared_lock lock(mutex_);
  ScanResult out;
  for (auto it = map_.lower_bound(start); it != map_.end() && out.size() < count; ++it)
    out.emplace_back(it->first, it->second);
  return out;
}

std::unique_ptr<KvIndex> make_index(IndexChoice choice,
                                    const cuckoo_trie::IndexOptions& options) {
  if (choice == IndexChoice::kReference) return std::make_unique<ReferenceKv>();
  return std::make_unique<CuckooTrieKv>(options);
}

}  // namespace ct_bench
