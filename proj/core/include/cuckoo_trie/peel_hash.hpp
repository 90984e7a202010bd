#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "cuckoo_trie/key_codec.hpp"

namespace cuckoo_trie {

using HashValue = std::uint64_t;
using BucketIndex = std::uint64_t;

inline constexpr std::uint64_t kDefaultTagSpace = 16;
inline constexpr std::uint64_t kDefaultPeelRadix = 32;
/// Locators carry 35 bits of hash, which caps buckets * tags.
inline constexpr unsigned kHashBits = 35;

/// Parameters of the peelable hash and the two-bucket mapping.
///
/// A hash value lives in [0, S*t). Its top part selects the primary bucket and
/// its low part (the tag) selects a displacement M[tag] to the secondary one.
class HashParams {
 public:
  /// Draws M uniformly from [0, bucket_count) with a PRNG seeded by `seed`.
  /// Throws std::invalid_argument unless bucket_count is even, >= 64, and
  /// bucket_count * 16 fits in the locator hash budget.
  HashParams(std::uint64_t bucket_count, std::uint64_t seed);

  /// Explicit displacement table, for tests that need fixed buckets.
  HashParams(std::uint64_t bucket_count, std::vector<std::uint64_t> displacement);

  [[nodiscard]] std::uint64_t bucket_count() const noexcept { return buckets_; }
  [[nodiscard]] std::uint64_t tag_space() const noexcept { return kDefaultTagSpace; }
  [[nodiscard]] std::uint64_t radix() const noexcept { return kDefaultPeelRadix; }
  [[nodiscard]] std::uint64_t hash_space() const noexcept { return space_; }
  [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }
  [[nodiscard]] std::span<const std::uint64_t> displacement() const noexcept {
    return m_;
  }

  /// h(x.c) from h(x). h of the empty string is 0.
  [[nodiscard]] HashValue extend(HashValue parent, Symbol c) const noexcept {
    const std::uint64_t z = parent ^ c;
    return z / kDefaultPeelRadix + stride_ * (z % kDefaultPeelRadix);
  }

  /// Inverse of extend: peel(extend(h, c), c) == h.
  [[nodiscard]] HashValue peel(HashValue child, Symbol c) const noexcept {
    return c ^ (kDefaultPeelRadix * (child % stride_) +
                child * kDefaultPeelRadix / space_);
  }

  /// Hash of the whole symbol sequence.
  [[nodiscard]] HashValue hash_of(std::span<const Symbol> symbols) const noexcept {
    HashValue h = 0;
    for (const Symbol c : symbols) h = extend(h, c);
    return h;
  }

  [[nodiscard]] std::uint64_t tag_of(HashValue h) const noexcept {
    return h % kDefaultTagSpace;
  }

  /// (primary, secondary) buckets of h.
  [[nodiscard]] std::pair<BucketIndex, BucketIndex> buckets_for(
      HashValue h) const noexcept {
    const BucketIndex b1 = h / kDefaultTagSpace;
    return {b1, (b1 + m_[h % kDefaultTagSpace]) % buckets_};
  }

  /// The other bucket of an entry that currently sits in `current`.
  [[nodiscard]] BucketIndex alternate_bucket(BucketIndex current, std::uint64_t tag,
                                             bool is_primary) const noexcept {
    const std::uint64_t d = m_[tag];
    return is_primary ? (current + d) % buckets_
                      : (current + buckets_ - d) % buckets_;
  }

  /// Reconstructs the full hash of an entry from its position and tag.
  [[nodiscard]] HashValue hash_at(BucketIndex current, std::uint64_t tag,
                                  bool is_primary) const noexcept {
    const BucketIndex primary =
        is_primary ? current : alternate_bucket(current, tag, false);
    return primary * kDefaultTagSpace + tag;
  }

 private:
  void validate() const;

  std::uint64_t buckets_;
  std::uint64_t space_;
  std::uint64_t stride_;  // S*t/R
  std::uint64_t seed_ = 0;
  std::vector<std::uint64_t> m_;
};

}  // namespace cuckoo_trie
