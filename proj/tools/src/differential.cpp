#include "ct_bench/differential.hpp"

#include <random>
#include <sstream>

#include "ct_bench/kv_index.hpp"
#include "cuckoo_trie/verify.hpp"

namespace ct_bench {
namespace {

std::string hex(std::string_view key) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  for (const char c : key) {
    out += kDigits[static_cast<unsigned char>(c) >> 4];
    out += kDigits[static_cast<unsigned char>(c) & 15];
  }
  return out;
}

std::string show(const ScanResult& r) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < r.size(); ++i) os << (i ? " " : "") << hex(r[i].first);
  os << ']';
  return os.str();
}

std::string show(const std::optional<std::uint64_t>& v) {
  return v ? std::to_string(*v) : "absent";
}

}  // namespace

std::string describe(const DiffOp& op) {
  switch (op.kind) {
    case DiffOp::Kind::kInsert: return "insert " + hex(op.key);
    case DiffOp::Kind::kLookup: return "lookup " + hex(op.key);
    case DiffOp::Kind::kErase: return "erase " + hex(op.key);
    case DiffOp::Kind::kScan: return "scan " + hex(op.key) + " " + std::to_string(op.count);
  }
  return "?";
}

DifferentialVerdict differential(const DifferentialConfig& config) {
  DifferentialVerdict v;
  if (config.key_space.empty()) return v;

  CuckooTrieKv trie(config.index);
  ReferenceKv ref;
  std::mt19937_64 rng(config.seed);
  std::uniform_int_distribution<std::size_t> pick(0, config.key_space.size() - 1);
  std::uniform_int_distribution<std::size_t> scan_len(1, 100);
  std::vector<DiffOp> stream;
  stream.reserve(config.op_count);

  auto diverge = [&](std::string detail) {
    v.pass = false;
    v.detail = std::move(detail);
    v.failing_prefix = stream;
    return v;
  };

  for (std::size_t i = 0; i < config.op_count; ++i) {
    const unsigned roll = rng() % 100;
    DiffOp op;
    op.key = config.key_space[pick(rng)];
    if (roll < 35) {
      op.kind = DiffOp::Kind::kInsert;
    } else if (roll < 65) {
      op.kind = DiffOp::Kind::kLookup;
    } else if (roll < 85) {
      op.kind = config.deletes ? DiffOp::Kind::kErase : DiffOp::Kind::kLookup;
    } else {
      op.kind = DiffOp::Kind::kScan;
      op.count = scan_len(rng);
    }
    stream.push_back(op);
    v.ops_run = i + 1;

    try {
      switch (op.kind) {
        case DiffOp::Kind::kInsert: {
          const bool a = trie.insert(op.key, i);
          const bool b = ref.insert(op.key, i);
          if (a != b) return diverge("insert returned " + std::to_string(a) + ", expected " +
                                     std::to_string(b));
          break;
        }
        case DiffOp::Kind::kLookup: {
          const auto a = trie.lookup(op.key);
          const auto b = ref.lookup(op.key);
          if (a != b) return diverge("lookup returned " + show(a) + ", expected " + show(b));
          break;
        }
        case DiffOp::Kind::kErase: {
          const bool a = trie.erase(op.key);
          const bool b = ref.erase(op.key);
          if (a != b) return diverge("erase returned " + std::to_string(a) + ", expected " +
                                     std::to_string(b));
          break;
        }
        case DiffOp::Kind::kScan: {
          const auto a = trie.scan(op.key, op.count);
          const auto b = ref.scan(op.key, op.count);
          if (a != b) return diverge("scan returned " + show(a) + ", expected " + show(b));
          break;
        }
      }
    } catch (const std::exception& e) {
      return diverge(std::string("exception: ") + e.what());
    }
  }

  const auto audit = cuckoo_trie::check_index(trie.index());
  if (!audit.ok()) return diverge("structure audit failed: " + audit.errors.front());
  return v;
}

std::string format_verdict(const DifferentialConfig& config, const DifferentialVerdict& v) {
  std::ostringstream os;
  if (v.pass) {
    os << "differential: PASS ops=" << v.ops_run << " seed=" << config.seed << '\n';
    return os.str();
  }
  os << "differential: DIVERGENCE at op " << v.failing_prefix.size() << " of "
     << config.op_count << " (seed=" << config.seed << ")\n"
     << "  " << v.detail << '\n'
     << "failing prefix (" << v.failing_prefix.size() << " ops):\n";
  constexpr std::size_t kShown = 40;
  const std::size_t n = v.failing_prefix.size();
  if (n > kShown) os << "  ... " << n - kShown << " earlier ops elided\n";
  for (std::size_t i = n > kShown ? n - kShown : 0; i < n; ++i)
    os << "  #" << i << ' ' << describe(v.failing_prefix[i]) << '\n';
  return os.str();
}

}  // namespace ct_bench
