#include "cuckoo_trie/verify.hpp"

#include <bit>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

namespace cuckoo_trie {
namespace {

std::string describe(const EntryMatch& m) {
  std::ostringstream os;
  os << to_string(m.entry.kind) << " at bucket " << m.ref.bucket << " slot "
     << int{m.ref.slot} << " (hash " << m.hash << ", color " << int{m.entry.color} << ")";
  return os.str();
}

class Walker {
 public:
  Walker(const TrieIndex& index, CheckReport* report, std::vector<NodeShape>* shape)
      : index_(index), table_(index.table()), report_(report), shape_(shape) {}

  void run() {
    const BucketImage img = table_.raw_image(0);
    const EntryMatch root{{0, 0}, img.entry(0), 0, img.version};
    if (!root.entry.is_internal()) {
      fail("root is not an internal node");
      return;
    }
    std::vector<Symbol> name;
    const Locator max = visit(root, name, true);
    if (!(root.entry.max_leaf == max)) fail("root subtree-max is stale");
  }

  std::vector<EntryMatch> leaves;
  std::vector<std::size_t> leaf_depths;
  std::set<std::pair<BucketIndex, int>> visited;

  void fail(std::string msg) {
    if (report_ != nullptr) report_->errors.push_back(std::move(msg));
  }

 private:
  Locator visit(const EntryMatch& m, std::vector<Symbol>& name, bool via_jump) {
    if (!visited.emplace(m.ref.bucket, m.ref.slot).second) {
      fail("node reached twice: " + describe(m));
      return Locator::null();
    }
    const Entry& e = m.entry;
    if (table_.hash_at(m.ref, e) != m.hash) fail("tag does not reproduce hash: " + describe(m));
    if (e.via_jump != via_jump) fail("via-jump flag wrong: " + describe(m));
    if (e.dirty) fail("dirty flag left set: " + describe(m));
    if (shape_ != nullptr) {
      NodeShape s{e.kind, name, {}, e.is_internal() ? e.child_bitmap : 0};
      if (e.is_jump()) s.label.assign(e.jump_label().begin(), e.jump_label().end());
      shape_->push_back(std::move(s));
    }

    if (e.is_leaf()) {
      const SymbolKey key = encode(index_.keys().key_of(e.record));
      if (key.size() < name.size() || common_prefix(key.symbols(), name) != name.size())
        fail("leaf name is not a prefix of its key: " + describe(m));
      leaves.push_back(m);
      leaf_depths.push_back(name.size());
      return m.locator();
    }

    Locator max = Locator::null();
    if (e.is_internal()) {
      if (!name.empty() && std::popcount(e.child_bitmap) < 2)
        fail("internal node with fewer than two children: " + describe(m));
      for (unsigned s = 0; s < kAlphabetSize; ++s) {
        if (!e.has_child(static_cast<Symbol>(s))) continue;
        const auto sym = static_cast<Symbol>(s);
        auto child = table_.search_by_parent(table_.params().extend(m.hash, sym), sym, e.color, ctx_);
        if (!child) {
          fail("missing child " + std::to_string(s) + " of " + describe(m));
          continue;
        }
        name.push_back(sym);
        max = visit(*child, name, false);
        name.pop_back();
      }
    } else {
      if (e.jump_size == 0 || e.jump_size > kMaxJump) fail("bad jump size: " + describe(m));
      const auto label = e.jump_label();
      name.insert(name.end(), label.begin(), label.end());
      auto child = table_.search_by_color(table_.params().hash_of(name), name.back(),
                                          e.child_color, ctx_);
      if (!child) {
        fail("missing jump child of " + describe(m));
      } else {
        if (child->entry.is_leaf()) fail("jump node above a leaf: " + describe(m));
        if (child->entry.is_jump() && e.jump_size < kMaxJump)
          fail("short jump followed by a jump: " + describe(m));
        max = visit(*child, name, true);
      }
      name.resize(name.size() - label.size());
    }
    if (!name.empty() && !(e.max_leaf == max)) fail("subtree-max is stale: " + describe(m));
    return max;
  }

  const TrieIndex& index_;
  const BucketTable& table_;
  CheckReport* report_;
  std::vector<NodeShape>* shape_;
  ReadContext ctx_{ReadContext::Mode::kExclusive};
};

void check_table(const BucketTable& table, CheckReport& r) {
  std::set<std::pair<HashValue, Color>> by_color;
  std::set<std::tuple<HashValue, Symbol, Color>> by_parent;
  table.for_each_occupied([&](EntryRef ref, const Entry& e) {
    const HashValue h = table.hash_at(ref, e);
    const auto [b1, b2] = table.params().buckets_for(h);
    if ((e.is_primary ? b1 : b2) != ref.bucket) {
      r.errors.push_back("entry in the wrong bucket for its role: bucket " +
                         std::to_string(ref.bucket));
    }
    if (!by_color.emplace(h, e.color).second)
      r.errors.push_back("duplicate (hash, color) at bucket " + std::to_string(ref.bucket));
    if (!e.via_jump && !by_parent.emplace(h, e.last_symbol, e.parent_color).second) {
      r.errors.push_back("duplicate (hash, symbol, parent color) at bucket " +
                         std::to_string(ref.bucket));
    }
  });
}

}  // namespace

std::vector<NodeShape> trie_shape(const TrieIndex& index) {
  std::vector<NodeShape> shape;
  Walker w(index, nullptr, &shape);
  w.run();
  return shape;
}

CheckReport check_index(const TrieIndex& index) {
  CheckReport r;
  const BucketTable& table = index.table();
  check_table(table, r);

  Walker w(index, &r, nullptr);
  w.run();
  r.leaves = w.leaves.size();
  r.nodes = w.visited.size();
  if (r.nodes != table.occupied_slots()) {
    r.errors.push_back("unreachable entries: " + std::to_string(table.occupied_slots()) +
                       " occupied, " + std::to_string(r.nodes) + " reachable");
  }

  // Leaves sorted, each at its unique prefix.
  std::vector<SymbolKey> keys;
  for (const auto& leaf : w.leaves) keys.push_back(encode(index.keys().key_of(leaf.entry.record)));
  for (std::size_t i = 0; i < keys.size(); ++i) {
    std::size_t lcp = 0;
    if (i > 0) {
      if (index.keys().key_of(w.leaves[i - 1].entry.record) >=
          index.keys().key_of(w.leaves[i].entry.record))
        r.errors.push_back("leaves out of order at position " + std::to_string(i));
      lcp = std::max(lcp, common_prefix(keys[i - 1].symbols(), keys[i].symbols()));
    }
    if (i + 1 < keys.size())
      lcp = std::max(lcp, common_prefix(keys[i].symbols(), keys[i + 1].symbols()));
    if (w.leaf_depths[i] != lcp + 1)
      r.errors.push_back("leaf not at its unique prefix at position " + std::to_string(i));
  }

  // The leaf list visits the same leaves in the same order.
  auto cursor = index.table().resolve_locator(
      Locator::unpack(table.anchor_word(table.raw_image(table.anchor_bucket()))));
  std::size_t pos = 0;
  for (; cursor && pos <= w.leaves.size(); ++pos) {
    if (pos == w.leaves.size() || !(cursor->locator() == w.leaves[pos].locator())) {
      r.errors.push_back("leaf list diverges from trie order at position " + std::to_string(pos));
      break;
    }
    cursor = table.resolve_locator(cursor->entry.next_leaf);
  }
  if (r.errors.empty() && pos != w.leaves.size())
    r.errors.push_back("leaf list ends early at position " + std::to_string(pos));
  return r;
}

}  // namespace cuckoo_trie
