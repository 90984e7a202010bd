#include "ct_bench/workload.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

namespace ct_bench {
namespace {

struct Workload {
  WorkloadName name;
  const char* label;
  OpMix mix;
};

constexpr Workload kWorkloads[] = {
    {WorkloadName::kLoad, "load", {0, 0, 1, 0, 0}},
    {WorkloadName::kA, "a", {0.5, 0.5, 0, 0, 0}},
    {WorkloadName::kB, "b", {0.95, 0.05, 0, 0, 0}},
    {WorkloadName::kC, "c", {1, 0, 0, 0, 0}},
    {WorkloadName::kD, "d", {0.95, 0, 0.05, 0, 0}},
    {WorkloadName::kE, "e", {0, 0, 0.05, 0.95, 0}},
    {WorkloadName::kF, "f", {0.5, 0, 0, 0, 0.5}},
};

double zeta(std::uint64_t n, double theta) {
  double sum = 0;
  for (std::uint64_t i = 1; i <= n; ++i) sum += 1.0 / std::pow(static_cast<double>(i), theta);
  return sum;
}

std::uint64_t fnv1a(std::uint64_t v) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (int i = 0; i < 8; ++i) {
    h ^= (v >> (8 * i)) & 0xff;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Runs body(thread, report) on `threads` workers and sums their reports.
template <typename F>
PhaseReport run_phase(const char* name, unsigned threads, F&& body) {
  std::vector<PhaseReport> parts(threads);
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto guarded = [&](unsigned t) {
    try {
      body(t, parts[t]);
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
    }
  };

  const auto start = std::chrono::steady_clock::now();
  if (threads == 1) {
    guarded(0);
  } else {
    std::vector<std::thread> workers;
    for (unsigned t = 0; t < threads; ++t) workers.emplace_back(guarded, t);
    for (auto& w : workers) w.join();
  }
  const auto stop = std::chrono::steady_clock::now();
  if (failure) std::rethrow_exception(failure);

  PhaseReport total;
  total.phase = name;
  for (const auto& p : parts) total += p;
  total.seconds = std::chrono::duration<double>(stop - start).count();
  return total;
}

}  // namespace

std::optional<WorkloadName> parse_workload(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  for (const auto& w : kWorkloads)
    if (lower == w.label) return w.name;
  return std::nullopt;
}

std::string_view to_string(WorkloadName name) {
  for (const auto& w : kWorkloads)
    if (w.name == name) return w.label;
  return "?";
}

OpMix mix_of(WorkloadName name) {
  for (const auto& w : kWorkloads)
    if (w.name == name) return w.mix;
  return {};
}

std::size_t insert_reserve(const WorkloadSpec& spec) {
  const double expected = mix_of(spec.name).insert * static_cast<double>(spec.op_count);
  if (spec.name == WorkloadName::kLoad || expected == 0) return 0;
  return static_cast<std::size_t>(expected + 6 * std::sqrt(expected) + 64);
}

ZipfianGenerator::ZipfianGenerator(std::uint64_t items, double theta)
    : items_(std::max<std::uint64_t>(items, 1)), theta_(theta) {
  alpha_ = 1.0 / (1.0 - theta_);
  zetan_ = zeta(items_, theta_);
  const double zeta2 = zeta(2, theta_);
  eta_ = (1 - std::pow(2.0 / static_cast<double>(items_), 1 - theta_)) / (1 - zeta2 / zetan_);
  half_pow_theta_ = 1 + std::pow(0.5, theta_);
}

std::uint64_t ZipfianGenerator::rank_for(double u) const {
  const double uz = u * zetan_;
  if (uz < 1.0) return 0;
  if (uz < half_pow_theta_) return std::min<std::uint64_t>(1, items_ - 1);
  const auto r = static_cast<std::uint64_t>(static_cast<double>(items_) *
                                            std::pow(eta_ * u - eta_ + 1, alpha_));
  return std::min(r, items_ - 1);
}

std::uint64_t ZipfianGenerator::scramble(std::uint64_t rank) const {
  return fnv1a(rank) % items_;
}

PhaseReport& PhaseReport::operator+=(const PhaseReport& o) {
  ops += o.ops;
  lookups += o.lookups;
  lookup_hits += o.lookup_hits;
  updates += o.updates;
  inserts += o.inserts;
  scans += o.scans;
  scanned_items += o.scanned_items;
  read_modify_writes += o.read_modify_writes;
  return *this;
}

RunReport run_workload(const WorkloadSpec& spec, const Dataset& dataset, KvIndex& index) {
  const std::size_t reserve = insert_reserve(spec);
  if (reserve >= dataset.keys.size())
    throw DatasetError("dataset too small for the run phase's inserts");
  const std::size_t load_count = dataset.keys.size() - reserve;
  const unsigned threads = std::max(1u, spec.threads);
  const auto& keys = dataset.keys;

  RunReport report;
  report.workload = std::string(to_string(spec.name));
  report.dataset = dataset.name;
  report.index = std::string(index.name());
  report.threads = threads;
  report.keys_loaded = load_count;

  report.phases.push_back(run_phase("load", threads, [&](unsigned t, PhaseReport& r) {
    for (std::size_t i = t; i < load_count; i += threads) {
      index.insert(keys[i], i);
      ++r.inserts;
      ++r.ops;
    }
  }));

  if (spec.name != WorkloadName::kLoad && spec.op_count > 0) {
    const OpMix mix = mix_of(spec.name);
    std::optional<ZipfianGenerator> zipf;
    if (spec.zipfian) zipf.emplace(load_count);
    std::atomic<std::size_t> next_insert{load_count};
    std::atomic<std::size_t> published{load_count};
    std::atomic<bool> aborted{false};

    report.phases.push_back(run_phase("run", threads, [&](unsigned t, PhaseReport& r) {
      std::seed_seq seq{spec.seed, std::uint64_t{t}, std::uint64_t{0x5eed}};
      std::mt19937_64 rng(seq);
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      std::uniform_int_distribution<std::size_t> scan_len(1, spec.max_scan);
      const std::size_t my_ops = spec.op_count / threads + (t < spec.op_count % threads);

      auto pick = [&](bool latest) {
        const std::size_t pub = published.load(std::memory_order_acquire);
        if (latest) {
          const std::size_t window = std::min(spec.latest_window, pub);
          return pub - 1 - std::uniform_int_distribution<std::size_t>(0, window - 1)(rng);
        }
        if (zipf) return static_cast<std::size_t>(zipf->next(rng)) % pub;
        return std::uniform_int_distribution<std::size_t>(0, pub - 1)(rng);
      };

      try {
        for (std::size_t op = 0; op < my_ops; ++op) {
          double x = unit(rng);
          ++r.ops;
          if ((x -= mix.insert) < 0) {
            const std::size_t i = next_insert.fetch_add(1);
            if (i < keys.size()) {
              index.insert(keys[i], i);
              ++r.inserts;
              // Publish in dataset order so readers only see finished inserts.
              while (published.load(std::memory_order_acquire) != i) {
                if (aborted.load()) return;
                std::this_thread::yield();
              }
              published.store(i + 1, std::memory_order_release);
              continue;
            }
            x = 0;  // reserve exhausted; fall through to a lookup
          }
          const std::string& key = keys[pick(spec.name == WorkloadName::kD)];
          if ((x -= mix.scan) < 0) {
            r.scanned_items += index.scan(key, scan_len(rng)).size();
            ++r.scans;
          } else if ((x -= mix.update) < 0) {
            index.update(key, rng());
            ++r.updates;
          } else if ((x -= mix.read_modify_write) < 0) {
            index.read_modify_write(key, 1);
            ++r.read_modify_writes;
          } else {
            ++r.lookups;
            if (index.lookup(key)) ++r.lookup_hits;
          }
        }
      } catch (...) {
        aborted.store(true);
        throw;
      }
    }));
  }

  report.index_bytes = index.index_bytes();
  report.record_bytes = index.record_bytes();
  if (const auto* ct = dynamic_cast<const CuckooTrieKv*>(&index)) report.stats = ct->index().stats();
  return report;
}

std::string format_report(const RunReport& report) {
  std::ostringstream os;
  char line[256];
  std::snprintf(line, sizeof line, "%-6s %12s %10s %14s %10s %10s %10s %10s %10s %12s %10s\n",
                "phase", "ops", "seconds", "ops/sec", "lookups", "hits", "updates", "inserts",
                "scans", "scan_items", "rmw");
  os << line;
  for (const auto& p : report.phases) {
    std::snprintf(line, sizeof line,
                  "%-6s %12zu %10.3f %14.0f %10zu %10zu %10zu %10zu %10zu %12zu %10zu\n",
                  p.phase.c_str(), p.ops, p.seconds, p.ops_per_sec(), p.lookups, p.lookup_hits,
                  p.updates, p.inserts, p.scans, p.scanned_items, p.read_modify_writes);
    os << line;
  }
  os << '\n';
  for (const auto& p : report.phases) {
    os << "phase=" << p.phase << " workload=" << report.workload << " ops=" << p.ops
       << " seconds=" << p.seconds << " ops_per_sec=" << p.ops_per_sec()
       << " lookups=" << p.lookups << " lookup_hits=" << p.lookup_hits
       << " updates=" << p.updates << " inserts=" << p.inserts << " scans=" << p.scans
       << " scanned_items=" << p.scanned_items << " read_modify_writes=" << p.read_modify_writes
       << '\n';
  }
  os << "summary index=" << report.index << " dataset=" << report.dataset
     << " threads=" << report.threads << " keys_loaded=" << report.keys_loaded
     << " index_bytes=" << report.index_bytes << " record_bytes=" << report.record_bytes
     << " memory_bytes=" << report.index_bytes + report.record_bytes
     << " unique_prefix_bits=" << report.unique_prefix_bits;
  if (report.stats) {
    const auto& s = *report.stats;
    os << " buckets=" << s.bucket_count << " leaves=" << s.leaves
       << " internal_nodes=" << s.internal_nodes << " jump_nodes=" << s.jump_nodes
       << " nodes_per_key="
       << (s.leaves ? static_cast<double>(s.nodes()) / static_cast<double>(s.leaves) : 0.0)
       << " load_factor=" << s.load_factor() << " relocations=" << s.relocations;
  }
  os << '\n';
  return os.str();
}

}  // namespace ct_bench
