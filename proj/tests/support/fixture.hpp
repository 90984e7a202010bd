#pragma once

#include <map>
#include <random>
#include <string>
#include <vector>

#include "cuckoo_trie/record_store.hpp"
#include "cuckoo_trie/scan.hpp"
#include "cuckoo_trie/trie_index.hpp"
#include "cuckoo_trie/verify.hpp"

namespace testing_support {

inline cuckoo_trie::IndexOptions options(std::uint64_t buckets = 1 << 12, std::uint64_t seed = 1) {
  cuckoo_trie::IndexOptions o;
  o.bucket_count = buckets;
  o.seed = seed;
  return o;
}

/// An index plus the record store that owns its keys.
struct Trie {
  explicit Trie(const cuckoo_trie::IndexOptions& o = options()) : index(o, store) {}

  cuckoo_trie::InsertResult insert(std::string_view key, std::uint64_t value = 0) {
    return index.insert(key, store.append(key, value));
  }
  std::optional<std::string> key_at(cuckoo_trie::RecordRef ref) const {
    return std::string(store.key_of(ref));
  }

  cuckoo_trie::RecordStore store;
  cuckoo_trie::TrieIndex index;
};

/// `n` distinct keys of 1..max_len random bytes from a small alphabet, each
/// ending in a 0x00 terminator so the set is prefix-free.
inline std::vector<std::string> terminated_keys(std::size_t n, std::size_t max_len,
                                                std::uint64_t seed, int alphabet = 4) {
  std::mt19937_64 rng(seed);
  std::map<std::string, bool> seen;
  std::vector<std::string> out;
  while (out.size() < n) {
    std::string k(1 + rng() % max_len, '\0');
    for (auto& c : k) c = static_cast<char>(1 + rng() % alphabet);
    k += '\0';
    if (seen.emplace(k, true).second) out.push_back(k);
  }
  return out;
}

inline std::vector<std::string> random_fixed_keys(std::size_t n, std::size_t width,
                                                  std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::map<std::string, bool> seen;
  std::vector<std::string> out;
  while (out.size() < n) {
    std::string k(width, '\0');
    for (auto& c : k) c = static_cast<char>(rng());
    if (seen.emplace(k, true).second) out.push_back(k);
  }
  return out;
}

}  // namespace testing_support
