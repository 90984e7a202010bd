#include "cuckoo_trie/record_store.hpp"

#include <cstring>
#include <stdexcept>

namespace cuckoo_trie {
namespace {

// Record layout: [u64 value][u16 key length][key bytes], padded to 8 bytes.
constexpr std::size_t kHeader = 10;

constexpr std::size_t record_size(std::size_t key_len) {
  return (kHeader + key_len + 7) & ~std::size_t{7};
}

}  // namespace

RecordStore::~RecordStore() {
  for (std::size_t i = 0; i < chunk_count_; ++i)
    delete[] chunks_[i].load(std::memory_order_relaxed);
}

RecordRef RecordStore::append(std::string_view key, std::uint64_t value) {
  if (key.size() > 0xffff) throw std::length_error("RecordStore: key too long");
  const std::size_t need = record_size(key.size());

  std::lock_guard guard(append_mutex_);
  if (chunk_count_ == 0 || tail_ + need > kChunkSize) {
    if (chunk_count_ == kMaxChunks) throw std::length_error("RecordStore: arena exhausted");
    chunks_[chunk_count_].store(new std::byte[kChunkSize], std::memory_order_release);
    ++chunk_count_;
    tail_ = 0;
  }
  std::byte* p = chunks_[chunk_count_ - 1].load(std::memory_order_relaxed) + tail_;
  const RecordRef ref = ((chunk_count_ - 1) << kChunkBits) | tail_;
  tail_ += need;

  new (p) std::atomic<std::uint64_t>(value);
  const auto len = static_cast<std::uint16_t>(key.size());
  std::memcpy(p + 8, &len, sizeof len);
  std::memcpy(p + kHeader, key.data(), key.size());
  count_.fetch_add(1, std::memory_order_relaxed);
  if (ref > kMaxRecordRef) throw std::length_error("RecordStore: reference overflow");
  return ref;
}

std::byte* RecordStore::locate(RecordRef ref) const {
  return chunks_[ref >> kChunkBits].load(std::memory_order_acquire) +
         (ref & (kChunkSize - 1));
}

std::string_view RecordStore::key_of(RecordRef ref) const {
  const std::byte* p = locate(ref);
  std::uint16_t len;
  std::memcpy(&len, p + 8, sizeof len);
  return {reinterpret_cast<const char*>(p + kHeader), len};
}

void RecordStore::prefetch(RecordRef ref) const noexcept {
#ifndef CUCKOO_TRIE_NO_PREFETCH
  __builtin_prefetch(locate(ref), 0, 1);
#else
  (void)ref;
#endif
}

std::uint64_t RecordStore::value(RecordRef ref) const {
  return reinterpret_cast<const std::atomic<std::uint64_t>*>(locate(ref))
      ->load(std::memory_order_acquire);
}

void RecordStore::set_value(RecordRef ref, std::uint64_t v) {
  reinterpret_cast<std::atomic<std::uint64_t>*>(locate(ref))
      ->store(v, std::memory_order_release);
}

std::uint64_t RecordStore::add_value(RecordRef ref, std::uint64_t delta) {
  return reinterpret_cast<std::atomic<std::uint64_t>*>(locate(ref))
      ->fetch_add(delta, std::memory_order_acq_rel);
}

std::size_t RecordStore::memory_bytes() const noexcept {
  std::lock_guard guard(append_mutex_);
  return chunk_count_ * kChunkSize;
}

}  // namespace cuckoo_trie
