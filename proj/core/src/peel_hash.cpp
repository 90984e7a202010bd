#include "cuckoo_trie/peel_hash.hpp"

#include <random>
#include <stdexcept>
#include <string>

namespace cuckoo_trie {

HashParams::HashParams(std::uint64_t bucket_count, std::uint64_t seed)
    : buckets_(bucket_count),
      space_(bucket_count * kDefaultTagSpace),
      stride_(space_ / kDefaultPeelRadix),
      seed_(seed) {
  validate();
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::uint64_t> pick(0, buckets_ - 1);
  m_.resize(kDefaultTagSpace);
  for (auto& d : m_) d = pick(rng);
}

HashParams::HashParams(std::uint64_t bucket_count,
                       std::vector<std::uint64_t> displacement)
    : buckets_(bucket_count),
      space_(bucket_count * kDefaultTagSpace),
      stride_(space_ / kDefaultPeelRadix),
      m_(std::move(displacement)) {
  validate();
  if (m_.size() != kDefaultTagSpace)
    throw std::invalid_argument("HashParams: displacement table needs 16 entries");
  for (const auto d : m_) {
    if (d >= buckets_)
      throw std::invalid_argument("HashParams: displacement out of range");
  }
}

void HashParams::validate() const {
  if (buckets_ < 64 || buckets_ % 2 != 0)
    throw std::invalid_argument("HashParams: bucket count must be even and >= 64, got " +
                                std::to_string(buckets_));
  if (space_ > (std::uint64_t{1} << kHashBits))
    throw std::invalid_argument("HashParams: bucket count exceeds 2^31");
  // Both the radix and the alphabet must divide S*t.
  static_assert(kDefaultPeelRadix == kAlphabetSize);
  if (space_ % kDefaultPeelRadix != 0)
    throw std::invalid_argument("HashParams: radix must divide S*t");
}

}  // namespace cuckoo_trie
