#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ct_bench {

class DatasetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Dataset {
  std::string name;
  std::vector<std::string> keys;  // distinct, shuffled
  std::size_t key_width = 0;      // 0 for variable-width keys
};

enum class GeneratedKind { kRand8, kRand16 };

/// `n` distinct uniformly random fixed-width keys in random order.
Dataset generate(GeneratedKind kind, std::size_t n, std::uint64_t seed);

enum class FileFormat { kLines, kFixedWidth };

/// Reads keys from a file, removes duplicates and shuffles with `seed`.
/// Text lines get a 0x00 terminator so that no key is a prefix of another.
/// Throws DatasetError on unreadable input or when no key is found.
Dataset ingest(const std::string& path, FileFormat format, std::size_t width,
               std::uint64_t seed);

/// Writes keys in the given format; lines lose their terminator.
void export_keys(const Dataset& dataset, const std::string& path, FileFormat format);

/// Mean length in bits of the shortest prefix that distinguishes each key
/// from every other key in the set.
double mean_unique_prefix_bits(const std::vector<std::string>& keys);

/// Parses "rand-8", "rand-16" or "file:PATH" (lines) / "file:PATH:W" (width W).
Dataset load_dataset(std::string_view spec, std::size_t n, std::uint64_t seed);

}  // namespace ct_bench
