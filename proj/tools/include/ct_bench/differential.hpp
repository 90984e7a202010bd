#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cuckoo_trie/trie_index.hpp"

namespace ct_bench {

struct DiffOp {
  enum class Kind { kInsert, kLookup, kErase, kScan } kind = Kind::kLookup;
  std::string key;
  std::size_t count = 0;  // scan length
};

std::string describe(const DiffOp& op);

struct DifferentialConfig {
  std::size_t op_count = 100'000;
  std::vector<std::string> key_space;  // prefix-free keys
  std::uint64_t seed = 1;
  bool deletes = true;
  cuckoo_trie::IndexOptions index;  // bucket_count, fault hooks
};

struct DifferentialVerdict {
  bool pass = true;
  std::size_t ops_run = 0;
  /// Shortest prefix of the op stream that exposes the divergence; its last
  /// op is the first one whose results differ.
  std::vector<DiffOp> failing_prefix;
  std::string detail;
};

/// The same seeded op stream (insert/lookup/erase/scan) is applied to the
/// cuckoo trie and to a reference ordered map; every result is compared, and
/// the trie's structure is audited at the end.
DifferentialVerdict differential(const DifferentialConfig& config);

/// Human-readable dump of a failing verdict (repro seed, op list).
std::string format_verdict(const DifferentialConfig& config, const DifferentialVerdict& v);

}  // namespace ct_bench
