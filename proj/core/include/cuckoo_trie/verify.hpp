#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "cuckoo_trie/trie_index.hpp"

namespace cuckoo_trie {

/// A trie node as reached from the root, independent of table placement.
struct NodeShape {
  NodeKind kind = NodeKind::kEmpty;
  std::vector<Symbol> name;   // symbols from the root to this node
  std::vector<Symbol> label;  // jump nodes only
  std::uint32_t child_bitmap = 0;

  friend bool operator==(const NodeShape&, const NodeShape&) = default;
};

/// Every node reachable from the root, in depth-first symbol order.
/// Requires a quiescent index.
[[nodiscard]] std::vector<NodeShape> trie_shape(const TrieIndex& index);

struct CheckReport {
  std::vector<std::string> errors;
  std::size_t leaves = 0;
  std::size_t nodes = 0;

  [[nodiscard]] bool ok() const noexcept { return errors.empty(); }
};

/// Full structural audit of a quiescent index: key elimination uniqueness,
/// tag fidelity, reachability of every slot, canonical node placement,
/// subtree maxima and the sorted leaf list.
[[nodiscard]] CheckReport check_index(const TrieIndex& index);

}  // namespace cuckoo_trie
