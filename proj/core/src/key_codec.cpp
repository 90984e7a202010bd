#include "cuckoo_trie/key_codec.hpp"

#include <algorithm>
#include <cassert>

namespace cuckoo_trie {

SymbolKey::SymbolKey(std::vector<Symbol> symbols, std::size_t source_len_bits)
    : symbols_(std::move(symbols)), source_len_bits_(source_len_bits) {
  assert(symbols_.size() == (source_len_bits_ + kSymbolBits - 1) / kSymbolBits);
}

SymbolKey encode(std::string_view key) {
  if (key.empty()) throw InvalidKeyError("cuckoo_trie: empty key");

  const std::size_t bits = key.size() * 8;
  std::vector<Symbol> out;
  out.reserve((bits + kSymbolBits - 1) / kSymbolBits);

  // Shift bytes into an accumulator and peel 5-bit chunks off the top.
  std::uint32_t acc = 0;
  unsigned have = 0;
  for (const char ch : key) {
    acc = (acc << 8) | static_cast<std::uint8_t>(ch);
    have += 8;
    while (have >= kSymbolBits) {
      have -= kSymbolBits;
      out.push_back(static_cast<Symbol>((acc >> have) & (kAlphabetSize - 1)));
    }
    acc &= (1u << have) - 1;
  }
  if (have > 0) {
    out.push_back(
        static_cast<Symbol>((acc << (kSymbolBits - have)) & (kAlphabetSize - 1)));
  }
  return SymbolKey(std::move(out), bits);
}

SymbolKey prefix(const SymbolKey& key, std::size_t count) {
  if (count > key.size())
    throw std::out_of_range("cuckoo_trie::prefix: count exceeds key length");
  auto s = key.symbols();
  return SymbolKey(std::vector<Symbol>(s.begin(), s.begin() + count),
                   count * kSymbolBits);
}

int compare(std::span<const Symbol> a, std::span<const Symbol> b) {
  const auto n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (a[i] != b[i]) return a[i] < b[i] ? -1 : 1;
  }
  if (a.size() == b.size()) return 0;
  return a.size() < b.size() ? -1 : 1;
}

std::size_t common_prefix(std::span<const Symbol> a,
                          std::span<const Symbol> b) noexcept {
  const auto n = std::min(a.size(), b.size());
  std::size_t i = 0;
  while (i < n && a[i] == b[i]) ++i;
  return i;
}

}  // namespace cuckoo_trie
