#include "cuckoo_trie/entry.hpp"

#include <cstring>

namespace cuckoo_trie {
namespace {

using u128 = unsigned __int128;

// Bit positions inside the 120-bit entry word.
constexpr unsigned kKindPos = 0;
constexpr unsigned kTagPos = 2;
constexpr unsigned kPrimaryPos = 6;
constexpr unsigned kSymbolPos = 7;
constexpr unsigned kColorPos = 12;
constexpr unsigned kParentColorPos = 15;
constexpr unsigned kDirtyPos = 18;
constexpr unsigned kViaJumpPos = 19;
constexpr unsigned kPayloadPos = 20;

constexpr unsigned kLocatorBits = 39;

// kInternal
constexpr unsigned kBitmapPos = kPayloadPos;
constexpr unsigned kInternalMaxPos = kBitmapPos + 32;
// kLeaf
constexpr unsigned kRecordPos = kPayloadPos;
constexpr unsigned kNextPos = kRecordPos + kRecordRefBits;
// kJump
constexpr unsigned kJumpSizePos = kPayloadPos;
constexpr unsigned kJumpSymbolsPos = kJumpSizePos + 4;
constexpr unsigned kChildColorPos = kJumpSymbolsPos + kMaxJump * kSymbolBits;
constexpr unsigned kJumpMaxPos = kChildColorPos + 3;

static_assert(kInternalMaxPos + kLocatorBits <= kEntryBytes * 8);
static_assert(kNextPos + kLocatorBits <= kEntryBytes * 8);
static_assert(kJumpMaxPos + kLocatorBits <= kEntryBytes * 8);

constexpr std::uint64_t mask(unsigned bits) {
  return bits >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << bits) - 1;
}

void put(u128& w, unsigned pos, unsigned bits, std::uint64_t v) {
  w |= static_cast<u128>(v & mask(bits)) << pos;
}

std::uint64_t get(u128 w, unsigned pos, unsigned bits) {
  return static_cast<std::uint64_t>(w >> pos) & mask(bits);
}

u128 load(std::span<const std::byte, kEntryBytes> in) {
  u128 w = 0;
  std::memcpy(&w, in.data(), kEntryBytes);
  return w;
}

void decode_header(u128 w, Entry& e) {
  e.kind = static_cast<NodeKind>(get(w, kKindPos, 2));
  e.tag = static_cast<std::uint8_t>(get(w, kTagPos, 4));
  e.is_primary = get(w, kPrimaryPos, 1) != 0;
  e.last_symbol = static_cast<Symbol>(get(w, kSymbolPos, 5));
  e.color = static_cast<Color>(get(w, kColorPos, 3));
  e.parent_color = static_cast<Color>(get(w, kParentColorPos, 3));
  e.dirty = get(w, kDirtyPos, 1) != 0;
  e.via_jump = get(w, kViaJumpPos, 1) != 0;
}

}  // namespace

std::uint64_t Locator::pack() const noexcept {
  if (!valid) return 0;
  return 1u | (std::uint64_t{color} & 7u) << 1 | (hash & mask(kHashBits)) << 4;
}

Locator Locator::unpack(std::uint64_t bits) noexcept {
  if ((bits & 1u) == 0) return {};
  return Locator::of(bits >> 4 & mask(kHashBits), static_cast<Color>(bits >> 1 & 7u));
}

void Entry::pack(std::span<std::byte, kEntryBytes> out) const noexcept {
  u128 w = 0;
  put(w, kKindPos, 2, static_cast<std::uint64_t>(kind));
  put(w, kTagPos, 4, tag);
  put(w, kPrimaryPos, 1, is_primary);
  put(w, kSymbolPos, 5, last_symbol);
  put(w, kColorPos, 3, color);
  put(w, kParentColorPos, 3, parent_color);
  put(w, kDirtyPos, 1, dirty);
  put(w, kViaJumpPos, 1, via_jump);
  switch (kind) {
    case NodeKind::kInternal:
      put(w, kBitmapPos, 32, child_bitmap);
      put(w, kInternalMaxPos, kLocatorBits, max_leaf.pack());
      break;
    case NodeKind::kLeaf:
      put(w, kRecordPos, kRecordRefBits, record);
      put(w, kNextPos, kLocatorBits, next_leaf.pack());
      break;
    case NodeKind::kJump:
      put(w, kJumpSizePos, 4, jump_size);
      for (std::size_t i = 0; i < kMaxJump; ++i)
        put(w, kJumpSymbolsPos + static_cast<unsigned>(i) * kSymbolBits, kSymbolBits,
            i < jump_size ? jump_symbols[i] : 0);
      put(w, kChildColorPos, 3, child_color);
      put(w, kJumpMaxPos, kLocatorBits, max_leaf.pack());
      break;
    case NodeKind::kEmpty:
      w = 0;
      break;
  }
  std::memcpy(out.data(), &w, kEntryBytes);
}

Entry Entry::unpack_header(std::span<const std::byte, kEntryBytes> in) noexcept {
  Entry e;
  decode_header(load(in), e);
  return e;
}

Entry Entry::unpack(std::span<const std::byte, kEntryBytes> in) noexcept {
  const u128 w = load(in);
  Entry e;
  decode_header(w, e);
  switch (e.kind) {
    case NodeKind::kInternal:
      e.child_bitmap = static_cast<std::uint32_t>(get(w, kBitmapPos, 32));
      e.max_leaf = Locator::unpack(get(w, kInternalMaxPos, kLocatorBits));
      break;
    case NodeKind::kLeaf:
      e.record = get(w, kRecordPos, kRecordRefBits);
      e.next_leaf = Locator::unpack(get(w, kNextPos, kLocatorBits));
      break;
    case NodeKind::kJump:
      e.jump_size = static_cast<std::uint8_t>(get(w, kJumpSizePos, 4));
      if (e.jump_size > kMaxJump) e.jump_size = kMaxJump;  // torn read guard
      for (std::size_t i = 0; i < e.jump_size; ++i)
        e.jump_symbols[i] = static_cast<Symbol>(
            get(w, kJumpSymbolsPos + static_cast<unsigned>(i) * kSymbolBits, kSymbolBits));
      e.child_color = static_cast<Color>(get(w, kChildColorPos, 3));
      e.max_leaf = Locator::unpack(get(w, kJumpMaxPos, kLocatorBits));
      break;
    case NodeKind::kEmpty:
      break;
  }
  return e;
}

bool Entry::same_encoding(const Entry& o) const noexcept {
  if (kind != o.kind) return false;
  if (kind == NodeKind::kEmpty) return true;
  if (tag != o.tag || is_primary != o.is_primary || last_symbol != o.last_symbol ||
      color != o.color || parent_color != o.parent_color || dirty != o.dirty ||
      via_jump != o.via_jump)
    return false;
  switch (kind) {
    case NodeKind::kInternal:
      return child_bitmap == o.child_bitmap && max_leaf == o.max_leaf;
    case NodeKind::kLeaf:
      return record == o.record && next_leaf == o.next_leaf;
    case NodeKind::kJump:
      if (jump_size != o.jump_size || child_color != o.child_color ||
          !(max_leaf == o.max_leaf))
        return false;
      for (std::size_t i = 0; i < jump_size; ++i)
        if (jump_symbols[i] != o.jump_symbols[i]) return false;
      return true;
    case NodeKind::kEmpty:
      break;
  }
  return true;
}

const char* to_string(NodeKind kind) noexcept {
  switch (kind) {
    case NodeKind::kEmpty: return "empty";
    case NodeKind::kLeaf: return "leaf";
    case NodeKind::kInternal: return "internal";
    case NodeKind::kJump: return "jump";
  }
  return "?";
}

}  // namespace cuckoo_trie
