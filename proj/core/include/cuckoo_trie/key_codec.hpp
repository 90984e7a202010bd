#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace cuckoo_trie {

/// Width of one trie symbol in bits. The entry layout (a 32-bit child
/// bitmap) depends on it, so it is not configurable.
inline constexpr unsigned kSymbolBits = 5;
inline constexpr unsigned kAlphabetSize = 1u << kSymbolBits;

using Symbol = std::uint8_t;

class InvalidKeyError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A byte key rendered as 5-bit symbols, most significant bit first. The last
/// symbol is zero-padded.
class SymbolKey {
 public:
  SymbolKey() = default;
  SymbolKey(std::vector<Symbol> symbols, std::size_t source_len_bits);

  [[nodiscard]] std::size_t size() const noexcept { return symbols_.size(); }
  [[nodiscard]] bool empty() const noexcept { return symbols_.empty(); }
  [[nodiscard]] Symbol operator[](std::size_t i) const noexcept {
    return symbols_[i];
  }
  [[nodiscard]] std::span<const Symbol> symbols() const noexcept {
    return symbols_;
  }
  [[nodiscard]] std::size_t source_len_bits() const noexcept {
    return source_len_bits_;
  }

  friend bool operator==(const SymbolKey&, const SymbolKey&) = default;

 private:
  std::vector<Symbol> symbols_;
  std::size_t source_len_bits_ = 0;
};

/// Throws InvalidKeyError on an empty key.
[[nodiscard]] SymbolKey encode(std::string_view key);

/// First `count` symbols of `key`. Throws std::out_of_range if count > size.
[[nodiscard]] SymbolKey prefix(const SymbolKey& key, std::size_t count);

/// Symbol-lexicographic comparison; a proper prefix orders first.
[[nodiscard]] int compare(std::span<const Symbol> a, std::span<const Symbol> b);

/// Length of the longest common symbol prefix.
[[nodiscard]] std::size_t common_prefix(std::span<const Symbol> a,
                                        std::span<const Symbol> b) noexcept;

}  // namespace cuckoo_trie
