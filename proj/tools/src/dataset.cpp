#include "ct_bench/dataset.hpp"

#include <algorithm>
#include <bit>
#include <fstream>
#include <iterator>
#include <random>
#include <unordered_set>

namespace ct_bench {
namespace {

void dedup_and_shuffle(std::vector<std::string>& keys, std::uint64_t seed) {
  std::unordered_set<std::string_view> seen;
  seen.reserve(keys.size());
  std::vector<std::string> out;
  out.reserve(keys.size());
  for (auto& k : keys) {
    if (seen.contains(k)) continue;
    out.push_back(std::move(k));
    seen.insert(out.back());  // `out` never reallocates
  }
  keys.swap(out);
  std::mt19937_64 rng(seed);
  std::shuffle(keys.begin(), keys.end(), rng);
}

std::size_t common_prefix_bits(std::string_view a, std::string_view b) {
  const std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) {
    const auto x = static_cast<unsigned char>(a[i] ^ b[i]);
    if (x != 0) return 8 * i + static_cast<std::size_t>(std::countl_zero(x));
  }
  return 8 * n;
}

}  // namespace

Dataset generate(GeneratedKind kind, std::size_t n, std::uint64_t seed) {
  const std::size_t width = kind == GeneratedKind::kRand8 ? 8 : 16;
  Dataset ds{kind == GeneratedKind::kRand8 ? "rand-8" : "rand-16", {}, width};
  std::mt19937_64 rng(seed);
  std::unordered_set<std::string> seen;
  seen.reserve(n);
  ds.keys.reserve(n);
  while (ds.keys.size() < n) {
    std::string key(width, '\0');
    for (std::size_t i = 0; i < width; i += 8) {
      const std::uint64_t word = rng();
      for (std::size_t j = 0; j < 8; ++j) key[i + j] = static_cast<char>(word >> (8 * j));
    }
    if (seen.insert(key).second) ds.keys.push_back(std::move(key));
  }
  std::shuffle(ds.keys.begin(), ds.keys.end(), rng);
  return ds;
}

Dataset ingest(const std::string& path, FileFormat format, std::size_t width,
               std::uint64_t seed) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DatasetError("cannot read " + path);
  const std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  Dataset ds{"file:" + path, {}, 0};
  if (format == FileFormat::kLines) {
    std::size_t start = 0;
    while (start < data.size()) {
      std::size_t end = data.find('\n', start);
      if (end == std::string::npos) end = data.size();
      std::string line = data.substr(start, end - start);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.find('\0') != std::string::npos)
        throw DatasetError(path + ": line contains a NUL byte");
      if (!line.empty()) ds.keys.push_back(line + '\0');
      start = end + 1;
    }
  } else {
    if (width == 0) throw DatasetError("fixed-width format needs a width");
    if (data.size() % width != 0)
      throw DatasetError(path + ": size is not a multiple of " + std::to_string(width));
    ds.key_width = width;
    for (std::size_t off = 0; off < data.size(); off += width)
      ds.keys.push_back(data.substr(off, width));
  }
  if (ds.keys.empty()) throw DatasetError(path + ": no keys");
  dedup_and_shuffle(ds.keys, seed);
  return ds;
}

void export_keys(const Dataset& dataset, const std::string& path, FileFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DatasetError("cannot write " + path);
  for (const auto& k : dataset.keys) {
    if (format == FileFormat::kLines) {
      const std::string_view body =
          !k.empty() && k.back() == '\0' ? std::string_view(k).substr(0, k.size() - 1) : k;
      out << body << '\n';
    } else {
      out << k;
    }
  }
}

double mean_unique_prefix_bits(const std::vector<std::string>& keys) {
  if (keys.empty()) return 0.0;
  std::vector<std::string_view> sorted(keys.begin(), keys.end());
  std::sort(sorted.begin(), sorted.end());
  double total = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    std::size_t lcp = 0;
    if (i > 0) lcp = common_prefix_bits(sorted[i - 1], sorted[i]);
    if (i + 1 < sorted.size()) lcp = std::max(lcp, common_prefix_bits(sorted[i], sorted[i + 1]));
    total += static_cast<double>(std::min(lcp + 1, 8 * sorted[i].size()));
  }
  return total / static_cast<double>(sorted.size());
}

Dataset load_dataset(std::string_view spec, std::size_t n, std::uint64_t seed) {
  if (spec == "rand-8") return generate(GeneratedKind::kRand8, n, seed);
  if (spec == "rand-16") return generate(GeneratedKind::kRand16, n, seed);
  if (spec.starts_with("file:")) {
    std::string path(spec.substr(5));
    std::size_t width = 0;
    const auto colon = path.rfind(':');
    if (colon != std::string::npos && colon + 1 < path.size() &&
        std::all_of(path.begin() + static_cast<std::ptrdiff_t>(colon) + 1, path.end(),
                    [](char c) { return c >= '0' && c <= '9'; })) {
      width = std::stoul(path.substr(colon + 1));
      path.resize(colon);
    }
    Dataset ds = ingest(path, width ? FileFormat::kFixedWidth : FileFormat::kLines, width, seed);
    if (ds.keys.size() > n) ds.keys.resize(n);
    return ds;
  }
  throw DatasetError("unknown dataset '" + std::string(spec) + "'");
}

}  // namespace ct_bench
