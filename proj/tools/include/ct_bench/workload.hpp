#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "ct_bench/dataset.hpp"
#include "ct_bench/kv_index.hpp"

namespace ct_bench {

enum class WorkloadName { kLoad, kA, kB, kC, kD, kE, kF };

/// Operation mix of one YCSB workload; fractions sum to 1.
struct OpMix {
  double lookup = 0;
  double update = 0;
  double insert = 0;
  double scan = 0;
  double read_modify_write = 0;
};

struct WorkloadSpec {
  WorkloadName name = WorkloadName::kC;
  std::size_t op_count = 0;
  unsigned threads = 1;
  bool zipfian = false;
  std::uint64_t seed = 1;
  std::size_t max_scan = 100;
  std::size_t latest_window = 10'000;
};

std::optional<WorkloadName> parse_workload(std::string_view name);
std::string_view to_string(WorkloadName name);
OpMix mix_of(WorkloadName name);

/// Keys inserted during the run phase that must be held back from loading.
std::size_t insert_reserve(const WorkloadSpec& spec);

/// YCSB zipfian over [0, items) with the usual constant 0.99, scrambled so
/// popular items are spread over the key space.
class ZipfianGenerator {
 public:
  explicit ZipfianGenerator(std::uint64_t items, double theta = 0.99);
  /// Rank-ordered draw: 0 is the most popular item.
  template <typename Rng>
  std::uint64_t next_rank(Rng& rng) {
    const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    return rank_for(u);
  }
  template <typename Rng>
  std::uint64_t next(Rng& rng) {
    return scramble(next_rank(rng));
  }
  [[nodiscard]] std::uint64_t rank_for(double u) const;
  [[nodiscard]] std::uint64_t scramble(std::uint64_t rank) const;
  [[nodiscard]] std::uint64_t items() const noexcept { return items_; }

 private:
  std::uint64_t items_;
  double theta_, alpha_, zetan_, eta_, half_pow_theta_;
};

struct PhaseReport {
  std::string phase;
  std::size_t ops = 0;
  double seconds = 0;
  std::size_t lookups = 0;
  std::size_t lookup_hits = 0;
  std::size_t updates = 0;
  std::size_t inserts = 0;
  std::size_t scans = 0;
  std::size_t scanned_items = 0;
  std::size_t read_modify_writes = 0;

  [[nodiscard]] double ops_per_sec() const { return seconds > 0 ? ops / seconds : 0.0; }
  PhaseReport& operator+=(const PhaseReport& other);
};

struct RunReport {
  std::string workload;
  std::string dataset;
  std::string index;
  unsigned threads = 1;
  std::size_t keys_loaded = 0;
  std::vector<PhaseReport> phases;
  std::size_t index_bytes = 0;
  std::size_t record_bytes = 0;
  std::optional<cuckoo_trie::IndexStats> stats;
  double unique_prefix_bits = 0;
};

/// Loads the first `dataset.keys.size() - insert_reserve(spec)` keys, then
/// runs the workload's mix. Values are the key's dataset position.
/// Throws cuckoo_trie::TableFullError if the index is undersized.
RunReport run_workload(const WorkloadSpec& spec, const Dataset& dataset, KvIndex& index);

/// Human table followed by one key=value line per phase and one summary line.
std::string format_report(const RunReport& report);

}  // namespace ct_bench
