#include <cmath>
#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "ct_bench/dataset.hpp"
#include "ct_bench/differential.hpp"
#include "ct_bench/kv_index.hpp"
#include "ct_bench/workload.hpp"
#include "cuckoo_trie/bucket_table.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kDivergence = 1;
constexpr int kConfigError = 2;

// Room for ~1.6 nodes per key at 85% occupancy.
std::uint64_t auto_capacity(std::size_t keys) {
  auto buckets = static_cast<std::uint64_t>(std::ceil(static_cast<double>(keys) * 1.6 / (4 * 0.85)));
  buckets = std::max<std::uint64_t>(buckets, 64);
  return buckets + (buckets & 1);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cuckoo trie benchmark and differential test driver"};
  std::string workload_name = "c";
  std::string dataset_spec = "rand-8";
  std::size_t n = 1'000'000;
  std::size_t ops = 0;
  unsigned threads = 1;
  std::uint64_t seed = 1;
  std::uint64_t capacity = 0;
  bool differential = false;
  bool zipfian = false;
  bool no_deletes = false;
  bool no_prefetch = false;
  unsigned prefetch_depth = 5;
  std::string index_name = "cuckoo-trie";
  std::string fault;
  std::string export_path;

  app.add_option("--workload", workload_name, "load, a, b, c, d, e or f");
  app.add_option("--dataset", dataset_spec, "rand-8, rand-16, file:PATH or file:PATH:WIDTH");
  app.add_option("--n", n, "Number of keys (key space size in differential mode)")
      ->check(CLI::PositiveNumber);
  app.add_option("--ops", ops, "Operations in the run phase (default: --n)");
  app.add_option("--threads", threads, "Worker threads")->check(CLI::Range(1u, 1024u));
  app.add_option("--seed", seed, "Seed for data, op streams and the hash displacement table");
  app.add_option("--capacity", capacity, "Bucket count (0 = sized from the key count)");
  app.add_flag("--differential", differential, "Check against a reference ordered map");
  app.add_flag("--zipfian", zipfian, "Zipfian (0.99) instead of uniform key choice");
  app.add_option("--index", index_name, "cuckoo-trie or reference")
      ->check(CLI::IsMember({"cuckoo-trie", "reference"}));
  app.add_flag("--no-deletes", no_deletes, "Differential stream without erases");
  app.add_flag("--no-prefetch", no_prefetch, "Disable software prefetching");
  app.add_option("--prefetch-depth", prefetch_depth, "Prefix levels prefetched ahead");
  app.add_option("--inject-fault", fault, "Test hook: skip-max-leaf")
      ->check(CLI::IsMember({"skip-max-leaf"}));
  app.add_option("--export", export_path, "Also write the dataset's keys to this file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  const auto workload = ct_bench::parse_workload(workload_name);
  if (!workload) {
    std::cerr << "error: unknown workload '" << workload_name << "'\n";
    return kConfigError;
  }
  if (ops == 0) ops = differential ? 100'000 : n;

  ct_bench::WorkloadSpec spec;
  spec.name = *workload;
  spec.op_count = ops;
  spec.threads = threads;
  spec.zipfian = zipfian;
  spec.seed = seed;

  try {
    const std::size_t total = differential ? n : n + ct_bench::insert_reserve(spec);
    const ct_bench::Dataset dataset = ct_bench::load_dataset(dataset_spec, total, seed);
    if (!export_path.empty())
      ct_bench::export_keys(dataset, export_path,
                            dataset.key_width ? ct_bench::FileFormat::kFixedWidth
                                              : ct_bench::FileFormat::kLines);

    cuckoo_trie::IndexOptions options;
    options.bucket_count = capacity ? capacity : auto_capacity(dataset.keys.size());
    options.seed = seed;
    options.prefetch = !no_prefetch;
    options.prefetch_depth = prefetch_depth;
    options.fault_skip_max_leaf_update = fault == "skip-max-leaf";

    if (differential) {
      ct_bench::DifferentialConfig config;
      config.op_count = ops;
      config.key_space = dataset.keys;
      config.seed = seed;
      config.deletes = !no_deletes;
      config.index = options;
      const auto verdict = ct_bench::differential(config);
      std::cout << ct_bench::format_verdict(config, verdict);
      return verdict.pass ? kOk : kDivergence;
    }

    auto index = ct_bench::make_index(index_name == "reference"
                                          ? ct_bench::IndexChoice::kReference
                                          : ct_bench::IndexChoice::kCuckooTrie,
                                      options);
    auto report = ct_bench::run_workload(spec, dataset, *index);
    std::vector<std::string> loaded(dataset.keys.begin(),
                                    dataset.keys.begin() +
                                        static_cast<std::ptrdiff_t>(report.keys_loaded));
    report.unique_prefix_bits = ct_bench::mean_unique_prefix_bits(loaded);
    std::cout << ct_bench::format_report(report);
    return kOk;
  } catch (const cuckoo_trie::TableFullError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfigError;
  } catch (const ct_bench::DatasetError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfigError;
  }
}
