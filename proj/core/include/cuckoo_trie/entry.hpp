#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>

#include "cuckoo_trie/key_codec.hpp"
#include "cuckoo_trie/peel_hash.hpp"

namespace cuckoo_trie {

/// Opaque reference to a key-value record held outside the index.
using RecordRef = std::uint64_t;
inline constexpr unsigned kRecordRefBits = 48;
inline constexpr RecordRef kMaxRecordRef = (RecordRef{1} << kRecordRefBits) - 1;

inline constexpr unsigned kColorCount = 8;
/// Symbols held by one jump node.
inline constexpr std::size_t kMaxJump = 10;
inline constexpr std::size_t kEntryBytes = 15;
inline constexpr std::size_t kSlotsPerBucket = 4;

using Color = std::uint8_t;

/// Relocation-stable reference to a node: its name hash plus its color.
struct Locator {
  HashValue hash = 0;
  Color color = 0;
  bool valid = false;

  [[nodiscard]] static constexpr Locator null() noexcept { return {}; }
  [[nodiscard]] static constexpr Locator of(HashValue h, Color c) noexcept {
    return {h, c, true};
  }
  [[nodiscard]] constexpr explicit operator bool() const noexcept { return valid; }

  [[nodiscard]] std::uint64_t pack() const noexcept;
  [[nodiscard]] static Locator unpack(std::uint64_t bits) noexcept;

  friend constexpr bool operator==(const Locator& a, const Locator& b) noexcept {
    if (!a.valid || !b.valid) return a.valid == b.valid;
    return a.hash == b.hash && a.color == b.color;
  }
};

enum class NodeKind : std::uint8_t { kEmpty = 0, kLeaf = 1, kInternal = 2, kJump = 3 };

/// Logical view of one hash-table slot.
///
/// Common header fields apply to every kind. Payload fields are only
/// meaningful for the kind that owns them; pack() ignores the others.
struct Entry {
  NodeKind kind = NodeKind::kEmpty;
  std::uint8_t tag = 0;
  bool is_primary = false;
  Symbol last_symbol = 0;
  Color color = 0;
  Color parent_color = 0;
  bool dirty = false;
  // Set on nodes whose parent is a jump node (and on the root). Such nodes are
  // reached by color, never by parent color.
  bool via_jump = false;

  // kInternal
  std::uint32_t child_bitmap = 0;
  // kInternal, kJump
  Locator max_leaf;
  // kJump
  std::uint8_t jump_size = 0;
  std::array<Symbol, kMaxJump> jump_symbols{};
  Color child_color = 0;
  // kLeaf
  RecordRef record = 0;
  Locator next_leaf;

  [[nodiscard]] bool occupied() const noexcept { return kind != NodeKind::kEmpty; }
  [[nodiscard]] bool is_leaf() const noexcept { return kind == NodeKind::kLeaf; }
  [[nodiscard]] bool is_internal() const noexcept { return kind == NodeKind::kInternal; }
  [[nodiscard]] bool is_jump() const noexcept { return kind == NodeKind::kJump; }
  [[nodiscard]] bool has_child(Symbol s) const noexcept {
    return (child_bitmap >> s) & 1u;
  }
  [[nodiscard]] std::span<const Symbol> jump_label() const noexcept {
    return {jump_symbols.data(), jump_size};
  }

  /// Writes the 15-byte packed form.
  void pack(std::span<std::byte, kEntryBytes> out) const noexcept;
  [[nodiscard]] static Entry unpack(std::span<const std::byte, kEntryBytes> in) noexcept;
  /// Decodes only the header (kind, tag, primary flag, symbol, colors, flags).
  [[nodiscard]] static Entry unpack_header(
      std::span<const std::byte, kEntryBytes> in) noexcept;

  /// Equality of the fields that survive a pack/unpack round trip.
  [[nodiscard]] bool same_encoding(const Entry& other) const noexcept;
};

[[nodiscard]] const char* to_string(NodeKind kind) noexcept;

}  // namespace cuckoo_trie
