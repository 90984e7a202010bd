#include "cuckoo_trie/trie_index.hpp"

#include <algorithm>
#include <bit>
#include <cassert>
#include <random>
#include <stdexcept>

namespace cuckoo_trie {

namespace {

[[noreturn]] void corrupted(const char* what) {
  throw std::logic_error(std::string("cuckoo_trie: index corrupted: ") + what);
}

std::uint32_t bit(Symbol s) { return std::uint32_t{1} << s; }

}  // namespace

struct TrieIndex::PreparedChain {
  Entry top;
  HashValue top_hash = 0;
  std::vector<Locator> lower;  // jumps below the top, top-down
  std::optional<Locator> created_top;
  Locator bottom;
};

TrieIndex::TrieIndex(const IndexOptions& options, const KeyResolver& keys)
    : options_(options), keys_(keys), table_(options.bucket_count, options.seed) {
  LockSet locks(table_);
  Entry root;
  root.kind = NodeKind::kInternal;
  root.via_jump = true;  // never matched by parent color
  table_.place_pinned(root, locks);
}

std::vector<HashValue> TrieIndex::prefix_hashes(std::span<const Symbol> key) const {
  std::vector<HashValue> out(key.size() + 1);
  out[0] = 0;
  for (std::size_t i = 0; i < key.size(); ++i)
    out[i + 1] = table_.params().extend(out[i], key[i]);
  return out;
}

// ---------------------------------------------------------------------------
// Read side

TrieIndex::ChildResult TrieIndex::find_child(const PathStep& node, std::uint32_t depth_in_jump,
                                             const SymbolKey& key, std::size_t position,
                                             std::span<const HashValue> hashes,
                                             ReadContext& ctx) const {
  const Entry& e = node.node.entry;
  if (e.is_leaf()) return {};
  const Symbol sym = key[position];
  const HashValue h = hashes[position + 1];

  // A set bitmap bit with no matching entry means a relocation is in flight;
  // retry the probe a few times before giving up on the whole search.
  for (int attempt = 0; attempt < 4; ++attempt) {
    std::optional<EntryMatch> child;
    if (e.is_internal()) {
      if (!e.has_child(sym)) return {};
      child = table_.search_by_parent(h, sym, e.color, ctx);
    } else {
      if (depth_in_jump >= e.jump_size) return {ChildStatus::kFail, {}, 0};
      if (e.jump_symbols[depth_in_jump] != sym) return {};
      if (depth_in_jump + 1u < e.jump_size)
        return {ChildStatus::kSameJump, {}, depth_in_jump + 1};
      child = table_.search_by_color(h, sym, e.child_color, ctx);
    }
    if (!ctx.exclusive() && table_.version(node.node.ref.bucket) != node.node.version)
      return {ChildStatus::kFail, {}, 0};
    if (child) {
      if (!ctx.exclusive() && child->entry.is_leaf() && child->entry.dirty)
        return {ChildStatus::kFail, {}, 0};
      return {ChildStatus::kChild, *child, 0};
    }
    if (ctx.exclusive()) corrupted("child listed in bitmap is missing");
  }
  return {ChildStatus::kFail, {}, 0};
}

bool TrieIndex::locate(const SymbolKey& key, std::span<const HashValue> hashes,
                       ReadContext& ctx, SearchOutcome& out) const {
  out.path.clear();
  out.depth_in_jump = 0;
  out.matched_symbols = 0;

  const std::size_t n = key.size();
  const std::size_t ahead = options_.prefetch_depth;
  auto prefetch = [&](std::size_t len) {
    const auto [b1, b2] = table_.params().buckets_for(hashes[len]);
    table_.prefetch(b1);
    table_.prefetch(b2);
  };
  if (options_.prefetch) {
    for (std::size_t j = 1; j <= std::min(ahead, n); ++j) prefetch(j);
  }

  const BucketImage root_image = table_.read(0, ctx);
  const Entry root = root_image.entry(0);
  if (!root.is_internal()) {
    if (ctx.exclusive()) corrupted("root");
    return false;
  }
  out.path.push_back({EntryMatch{{0, 0}, root, 0, root_image.version}, 0});

  std::uint32_t d = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (options_.prefetch && ahead + i + 1 <= n) prefetch(ahead + i + 1);
    const ChildResult r = find_child(out.path.back(), d, key, i, hashes, ctx);
    switch (r.status) {
      case ChildStatus::kFail:
        return false;
      case ChildStatus::kNull: {
        const Entry& t = out.path.back().node.entry;
        out.stop = t.is_leaf()       ? SearchOutcome::Stop::kLeaf
                   : t.is_jump()     ? SearchOutcome::Stop::kJumpMismatch
                                     : SearchOutcome::Stop::kAbsentChild;
        out.matched_symbols = static_cast<std::uint32_t>(i);
        out.depth_in_jump = d;
        return true;
      }
      case ChildStatus::kSameJump:
        d = r.depth_in_jump;
        break;
      case ChildStatus::kChild:
        out.path.push_back({r.child, static_cast<std::uint32_t>(i + 1)});
        d = 0;
        break;
    }
  }
  out.matched_symbols = static_cast<std::uint32_t>(n);
  out.depth_in_jump = d;
  out.stop = out.path.back().node.entry.is_leaf() ? SearchOutcome::Stop::kLeaf
                                                  : SearchOutcome::Stop::kKeyExhausted;
  return true;
}

SearchOutcome TrieIndex::search(const SymbolKey& key) const {
  if (key.empty()) throw InvalidKeyError("cuckoo_trie: empty key");
  const auto hashes = prefix_hashes(key.symbols());
  SearchOutcome out;
  ReadContext ctx;
  for (std::uint32_t restarts = 0;; ++restarts) {
    ctx.clear();
    if (locate(key, hashes, ctx, out) && ctx.validate(table_)) {
      out.restarts = restarts;
      return out;
    }
  }
}

std::optional<RecordRef> TrieIndex::lookup(std::string_view key) const {
  const SymbolKey enc = encode(key);
  const auto hashes = prefix_hashes(enc.symbols());
  SearchOutcome s;
  ReadContext ctx;
  for (;;) {
    ctx.clear();
    if (!locate(enc, hashes, ctx, s)) continue;
    std::optional<RecordRef> result;
    if (s.stop == SearchOutcome::Stop::kLeaf) {
      const Entry& leaf = s.terminal().node.entry;
      if (leaf.dirty) continue;
      if (keys_.key_of(leaf.record) == key) result = leaf.record;
    }
    if (ctx.validate(table_)) return result;
  }
}

bool TrieIndex::max_leaf_of(const EntryMatch& node, ReadContext& ctx,
                            std::optional<EntryMatch>& out) const {
  if (node.entry.is_leaf()) {
    if (!ctx.exclusive() && node.entry.dirty) return false;
    out = node;
    return true;
  }
  auto m = table_.resolve_locator(node.entry.max_leaf, ctx);
  if (!m || !m->entry.is_leaf() || (!ctx.exclusive() && m->entry.dirty)) {
    if (ctx.exclusive()) corrupted("subtree-max locator does not resolve to a leaf");
    return false;
  }
  out = m;
  return true;
}

bool TrieIndex::ascend(const std::vector<PathStep>& path, std::size_t from,
                       const SymbolKey& key, ReadContext& ctx,
                       std::optional<EntryMatch>& out) const {
  for (std::size_t j = from; j >= 1; --j) {
    const PathStep& parent = path[j - 1];
    const Entry& pe = parent.node.entry;
    if (!pe.is_internal()) continue;
    const Symbol s = key[parent.depth];
    const std::uint32_t lower = pe.child_bitmap & (bit(s) - 1);
    if (lower == 0) continue;
    const auto sibling_sym = static_cast<Symbol>(31 - std::countl_zero(lower));
    const auto sibling = table_.search_by_parent(
        table_.params().extend(parent.node.hash, sibling_sym), sibling_sym, pe.color, ctx);
    if (!sibling) {
      if (ctx.exclusive()) corrupted("sibling listed in bitmap is missing");
      return false;
    }
    return max_leaf_of(*sibling, ctx, out);
  }
  out.reset();
  return true;
}

bool TrieIndex::predecessor_of(const SearchOutcome& s, const SymbolKey& key,
                               std::string_view raw_key, ReadContext& ctx,
                               std::optional<EntryMatch>& out) const {
  const std::size_t last = s.path.size() - 1;
  const EntryMatch& t = s.terminal().node;
  switch (s.stop) {
    case SearchOutcome::Stop::kLeaf:
      if (keys_.key_of(t.entry.record) < raw_key) return max_leaf_of(t, ctx, out);
      return ascend(s.path, last, key, ctx, out);
    case SearchOutcome::Stop::kAbsentChild: {
      const std::uint32_t lower = t.entry.child_bitmap & (bit(key[s.matched_symbols]) - 1);
      if (lower == 0) return ascend(s.path, last, key, ctx, out);
      const auto sym = static_cast<Symbol>(31 - std::countl_zero(lower));
      const auto child = table_.search_by_parent(table_.params().extend(t.hash, sym), sym,
                                                 t.entry.color, ctx);
      if (!child) {
        if (ctx.exclusive()) corrupted("child listed in bitmap is missing");
        return false;
      }
      return max_leaf_of(*child, ctx, out);
    }
    case SearchOutcome::Stop::kJumpMismatch:
      if (t.entry.jump_symbols[s.depth_in_jump] < key[s.matched_symbols])
        return max_leaf_of(t, ctx, out);
      return ascend(s.path, last, key, ctx, out);
    case SearchOutcome::Stop::kKeyExhausted:
      return ascend(s.path, last, key, ctx, out);
  }
  return false;
}

// ---------------------------------------------------------------------------
// Write side

EntryMatch TrieIndex::find_node(Locator id) const {
  ReadContext x(ReadContext::Mode::kExclusive);
  auto m = table_.resolve_locator(id, x);
  if (!m) corrupted("node vanished");
  return *m;
}

template <typename F>
void TrieIndex::update_node(Locator id, LockSet& locks, F&& mutate) {
  const EntryMatch m = find_node(id);
  Entry e = m.entry;
  mutate(e);
  table_.write_entry(m.ref, e, locks);
}

Locator TrieIndex::head_locator() const {
  return Locator::unpack(table_.anchor_word(table_.raw_image(table_.anchor_bucket())));
}

void TrieIndex::set_head(Locator head, LockSet& locks) {
  table_.write_anchor_word(head.pack(), locks);
}

void TrieIndex::lock_path(const SearchOutcome& s, LockSet& locks) {
  std::vector<BucketIndex> buckets;
  std::vector<std::uint32_t> versions;
  for (const auto& step : s.path) {
    buckets.push_back(step.node.ref.bucket);
    versions.push_back(table_.version(step.node.ref.bucket));
  }
  if (!locks.acquire_all(buckets, versions)) corrupted("path changed under the writer lock");
}

void TrieIndex::remove_node(Locator id, LockSet& locks) {
  table_.clear_entry(find_node(id).ref, locks);
}

Locator TrieIndex::create(HashValue h, const Entry& proto, LockSet& locks,
                          std::vector<Locator>& created) {
  const EntryMatch m = table_.insert_entry(h, proto, locks);
  created.push_back(m.locator());
  return m.locator();
}

namespace {

// Replaces the node at `slot` with `fresh`, keeping the header fields that tie
// it to its position in the table and in the trie.
Entry keep_header(const Entry& old, Entry fresh) {
  fresh.tag = old.tag;
  fresh.is_primary = old.is_primary;
  fresh.color = old.color;
  fresh.last_symbol = old.last_symbol;
  fresh.parent_color = old.parent_color;
  fresh.via_jump = old.via_jump;
  fresh.dirty = false;
  return fresh;
}

}  // namespace

void TrieIndex::redirect_leaf(Locator from, Locator to, const std::optional<EntryMatch>& pred,
                              std::span<const PathStep> ancestors, LockSet& locks) {
  if (pred)
    update_node(pred->locator(), locks, [&](Entry& e) { e.next_leaf = to; });
  else
    set_head(to, locks);
  for (const auto& a : ancestors) {
    if (a.node.entry.is_leaf()) continue;
    update_node(a.node.locator(), locks, [&](Entry& e) {
      if (e.max_leaf == from) e.max_leaf = to;
    });
  }
}

void TrieIndex::link_new_leaf(Locator leaf, const SymbolKey& key,
                              std::span<const HashValue> hashes, LockSet& locks,
                              const std::vector<PathStep>* parent_path) {
  ReadContext x(ReadContext::Mode::kExclusive);
  SearchOutcome s;
  if (parent_path != nullptr) {
    // Ascending only reads the parents' bitmaps below the key's own symbols,
    // which the insert did not touch.
    s.path = *parent_path;
    PathStep step;
    step.node.hash = leaf.hash;
    step.node.entry.color = leaf.color;
    step.depth = s.path.back().depth + 1;
    s.path.push_back(step);
  } else {
    locate(key, hashes, x, s);
    if (s.stop != SearchOutcome::Stop::kLeaf || !(s.terminal().node.locator() == leaf))
      corrupted("new leaf not reachable");
  }
  const std::size_t last = s.path.size() - 1;

  std::optional<EntryMatch> pred;
  ascend(s.path, last, key, x, pred);
  if (pred) {
    const Locator after = find_node(pred->locator()).entry.next_leaf;
    update_node(leaf, locks, [&](Entry& e) { e.next_leaf = after; });
    update_node(pred->locator(), locks, [&](Entry& e) { e.next_leaf = leaf; });
  } else {
    const Locator after = head_locator();
    update_node(leaf, locks, [&](Entry& e) { e.next_leaf = after; });
    set_head(leaf, locks);
  }

  if (options_.fault_skip_max_leaf_update) return;
  // Every ancestor whose maximum was the new leaf's predecessor now has the
  // new leaf as its maximum. An empty subtree-max only occurs at the root of
  // an empty trie.
  const Locator pred_id = pred ? pred->locator() : Locator::null();
  for (std::size_t j = 0; j < last; ++j) {
    update_node(s.path[j].node.locator(), locks, [&](Entry& e) {
      if (!e.max_leaf || (pred && e.max_leaf == pred_id)) e.max_leaf = leaf;
    });
  }
}

TrieIndex::PreparedChain TrieIndex::prepare_chain(std::span<const Symbol> names,
                                                  std::size_t top_depth, std::size_t length,
                                                  Locator bottom, Locator max_leaf,
                                                  LockSet& locks,
                                                  std::vector<Locator>& created) {
  assert(length >= 1 && top_depth >= 1 && names.size() >= top_depth + length);
  const auto hashes = prefix_hashes(names.first(top_depth + length));
  const std::size_t chunks = (length + kMaxJump - 1) / kMaxJump;

  auto make_jump = [&](std::size_t k, Color child_color) {
    const std::size_t start = top_depth + k * kMaxJump;
    const std::size_t size = std::min(kMaxJump, length - k * kMaxJump);
    Entry j;
    j.kind = NodeKind::kJump;
    j.last_symbol = names[start - 1];
    j.via_jump = k > 0;
    j.jump_size = static_cast<std::uint8_t>(size);
    std::copy_n(names.begin() + static_cast<std::ptrdiff_t>(start), size, j.jump_symbols.begin());
    j.child_color = child_color;
    j.max_leaf = max_leaf;
    return std::pair{j, hashes[start]};
  };

  PreparedChain chain;
  chain.bottom = bottom;
  chain.lower.resize(chunks - 1);
  Color child_color = bottom.color;
  for (std::size_t k = chunks - 1; k >= 1; --k) {
    auto [j, h] = make_jump(k, child_color);
    chain.lower[k - 1] = create(h, j, locks, created);
    child_color = chain.lower[k - 1].color;
  }
  std::tie(chain.top, chain.top_hash) = make_jump(0, child_color);
  return chain;
}

void TrieIndex::commit_chain(const PreparedChain& chain, std::optional<EntryMatch> replace,
                             Color, bool, LockSet& locks) {
  Color top_color;
  if (chain.created_top) {
    top_color = chain.created_top->color;
  } else {
    assert(replace);
    const EntryMatch old = find_node(replace->locator());
    top_color = old.entry.color;
    table_.write_entry(old.ref, keep_header(old.entry, chain.top), locks);
  }
  Color parent = top_color;
  for (const Locator& j : chain.lower) {
    update_node(j, locks, [&](Entry& e) { e.parent_color = parent; });
    parent = j.color;
  }
  update_node(chain.bottom, locks, [&](Entry& e) {
    e.parent_color = parent;
    e.via_jump = true;
  });
}

void TrieIndex::insert_under(const SearchOutcome& s, const SymbolKey& key,
                             std::span<const HashValue> hashes, RecordRef record,
                             LockSet& locks) {
  const PathStep& parent = s.terminal();
  const std::size_t i = parent.depth;
  std::vector<Locator> created;
  Entry leaf;
  leaf.kind = NodeKind::kLeaf;
  leaf.last_symbol = key[i];
  leaf.parent_color = parent.node.entry.color;
  leaf.record = record;
  const Locator n = create(hashes[i + 1], leaf, locks, created);

  update_node(parent.node.locator(), locks,
              [&](Entry& e) { e.child_bitmap |= bit(key[i]); });
  link_new_leaf(n, key, hashes, locks, &s.path);
}

void TrieIndex::insert_split_leaf(const SearchOutcome& s, const SymbolKey& key,
                                  std::span<const HashValue> hashes, RecordRef record,
                                  const SymbolKey& other, LockSet& locks) {
  const std::size_t last = s.path.size() - 1;
  const EntryMatch old_leaf = s.terminal().node;
  const std::size_t i = s.terminal().depth;
  const std::size_t lcp = common_prefix(key.symbols(), other.symbols());
  const auto other_hashes = prefix_hashes(other.symbols().first(lcp + 1));
  const Locator old_id = old_leaf.locator();

  std::optional<EntryMatch> pred;
  {
    ReadContext x(ReadContext::Mode::kExclusive);
    ascend(s.path, last, key, x, pred);
  }

  std::vector<Locator> created;
  try {
    // The branching node at the divergence point either takes over the old
    // leaf's slot or sits below a new chain of jump nodes.
    Locator branch = old_id;
    Entry branch_node;
    branch_node.kind = NodeKind::kInternal;
    branch_node.child_bitmap = bit(key[lcp]) | bit(other[lcp]);
    if (lcp > i) {
      branch_node.last_symbol = key[lcp - 1];
      branch_node.via_jump = true;
      branch = create(hashes[lcp], branch_node, locks, created);
    }

    Entry moved;
    moved.kind = NodeKind::kLeaf;
    moved.last_symbol = other[lcp];
    moved.parent_color = branch.color;
    moved.record = old_leaf.entry.record;
    moved.next_leaf = old_leaf.entry.next_leaf;
    const Locator moved_id = create(other_hashes[lcp + 1], moved, locks, created);

    Entry fresh;
    fresh.kind = NodeKind::kLeaf;
    fresh.last_symbol = key[lcp];
    fresh.parent_color = branch.color;
    fresh.record = record;
    const Locator fresh_id = create(hashes[lcp + 1], fresh, locks, created);

    std::optional<PreparedChain> chain;
    if (lcp > i)
      chain = prepare_chain(key.symbols(), i, lcp - i, branch, moved_id, locks, created);
    created.clear();

    // Link phase.
    redirect_leaf(old_id, moved_id, pred, std::span(s.path).first(last), locks);
    if (chain) {
      update_node(branch, locks, [&](Entry& e) { e.max_leaf = moved_id; });
      commit_chain(*chain, old_leaf, 0, false, locks);
    } else {
      branch_node.max_leaf = moved_id;
      const EntryMatch slot = find_node(old_id);
      table_.write_entry(slot.ref, keep_header(slot.entry, branch_node), locks);
    }
    link_new_leaf(fresh_id, key, hashes, locks);
  } catch (const TableFullError&) {
    for (const Locator& c : created) remove_node(c, locks);
    throw;
  }
}

void TrieIndex::insert_split_jump(const SearchOutcome& s, const SymbolKey& key,
                                  std::span<const HashValue> hashes, RecordRef record,
                                  LockSet& locks) {
  const EntryMatch jump = s.terminal().node;
  const Entry& je = jump.entry;
  const std::size_t d = s.depth_in_jump;
  const std::size_t i = s.matched_symbols;  // == jump depth + d

  // Names along the part of the chain that ends up below the new branch.
  std::vector<Symbol> names(key.symbols().begin(),
                            key.symbols().begin() + static_cast<std::ptrdiff_t>(i));
  names.insert(names.end(), je.jump_symbols.begin() + static_cast<std::ptrdiff_t>(d),
               je.jump_symbols.begin() + je.jump_size);

  ReadContext x(ReadContext::Mode::kExclusive);
  std::vector<Locator> old_jumps;
  auto below = table_.search_by_color(table_.params().hash_of(names), names.back(),
                                      je.child_color, x);
  while (below && below->entry.is_jump()) {
    old_jumps.push_back(below->locator());
    const auto label = below->entry.jump_label();
    names.insert(names.end(), label.begin(), label.end());
    below = table_.search_by_color(table_.params().hash_of(names), names.back(),
                                   below->entry.child_color, x);
  }
  if (!below) corrupted("jump child is missing");
  const EntryMatch bottom = *below;
  const std::size_t lower_len = names.size() - (i + 1);

  std::vector<Locator> created;
  try {
    Entry branch_node;
    branch_node.kind = NodeKind::kInternal;
    branch_node.child_bitmap = bit(key[i]) | bit(je.jump_symbols[d]);
    branch_node.max_leaf = je.max_leaf;
    Locator branch = jump.locator();
    if (d > 0) {
      branch_node.last_symbol = key[i - 1];
      branch_node.via_jump = true;
      branch_node.parent_color = je.color;
      branch = create(hashes[i], branch_node, locks, created);
    }

    Entry fresh;
    fresh.kind = NodeKind::kLeaf;
    fresh.last_symbol = key[i];
    fresh.parent_color = branch.color;
    fresh.record = record;
    const Locator fresh_id = create(hashes[i + 1], fresh, locks, created);

    std::optional<PreparedChain> chain;
    if (lower_len > 0) {
      chain = prepare_chain(names, i + 1, lower_len, bottom.locator(), je.max_leaf, locks,
                            created);
      chain->top.parent_color = branch.color;
      chain->top.via_jump = false;
      chain->created_top = create(chain->top_hash, chain->top, locks, created);
    }
    created.clear();

    if (chain) {
      commit_chain(*chain, std::nullopt, 0, false, locks);
    } else {
      update_node(bottom.locator(), locks, [&](Entry& e) {
        e.parent_color = branch.color;
        e.via_jump = false;
      });
    }
    const EntryMatch slot = find_node(jump.locator());
    if (d == 0) {
      table_.write_entry(slot.ref, keep_header(slot.entry, branch_node), locks);
    } else {
      Entry upper;
      upper.kind = NodeKind::kJump;
      upper.jump_size = static_cast<std::uint8_t>(d);
      std::copy_n(je.jump_symbols.begin(), d, upper.jump_symbols.begin());
      upper.child_color = branch.color;
      upper.max_leaf = je.max_leaf;
      table_.write_entry(slot.ref, keep_header(slot.entry, upper), locks);
    }
    for (const Locator& old : old_jumps) remove_node(old, locks);
    link_new_leaf(fresh_id, key, hashes, locks);
  } catch (const TableFullError&) {
    for (const Locator& c : created) remove_node(c, locks);
    throw;
  }
}

InsertResult TrieIndex::insert(std::string_view key, RecordRef record) {
  if (record > kMaxRecordRef) throw std::out_of_range("cuckoo_trie: record reference too wide");
  const SymbolKey enc = encode(key);
  const auto hashes = prefix_hashes(enc.symbols());

  std::lock_guard writer(write_mutex_);
  ReadContext x(ReadContext::Mode::kExclusive);
  SearchOutcome s;
  locate(enc, hashes, x, s);

  LockSet locks(table_);
  lock_path(s, locks);
  switch (s.stop) {
    case SearchOutcome::Stop::kKeyExhausted:
      throw InvalidKeyError("cuckoo_trie: key is a prefix of a stored key");
    case SearchOutcome::Stop::kLeaf: {
      const std::string_view stored = keys_.key_of(s.terminal().node.entry.record);
      if (stored == key) return InsertResult::kAlreadyPresent;
      const SymbolKey other = encode(stored);
      const std::size_t lcp = common_prefix(enc.symbols(), other.symbols());
      if (lcp >= enc.size() || lcp >= other.size())
        throw InvalidKeyError("cuckoo_trie: key and a stored key are prefixes of each other");
      insert_split_leaf(s, enc, hashes, record, other, locks);
      break;
    }
    case SearchOutcome::Stop::kAbsentChild:
      insert_under(s, enc, hashes, record, locks);
      break;
    case SearchOutcome::Stop::kJumpMismatch:
      insert_split_jump(s, enc, hashes, record, locks);
      break;
  }
  return InsertResult::kInserted;
}

bool TrieIndex::erase(std::string_view key) {
  const SymbolKey enc = encode(key);
  const auto hashes = prefix_hashes(enc.symbols());

  std::lock_guard writer(write_mutex_);
  ReadContext x(ReadContext::Mode::kExclusive);
  SearchOutcome s;
  locate(enc, hashes, x, s);
  if (s.stop != SearchOutcome::Stop::kLeaf) return false;
  const EntryMatch leaf = s.terminal().node;
  if (keys_.key_of(leaf.entry.record) != key) return false;

  const std::size_t last = s.path.size() - 1;
  const std::size_t parent_idx = last - 1;
  const PathStep& parent = s.path[parent_idx];
  const Symbol edge = enc[parent.depth];
  const Locator leaf_id = leaf.locator();

  std::optional<EntryMatch> pred;
  ascend(s.path, last, enc, x, pred);
  const Locator pred_id = pred ? pred->locator() : Locator::null();

  LockSet locks(table_);
  lock_path(s, locks);

  // Read phase for the structural repair. A parent left with one child is
  // folded into the chain above it; if that child is a leaf the leaf moves up.
  const std::uint32_t remaining = parent.node.entry.child_bitmap & ~bit(edge);
  const bool fold = parent_idx != 0 && std::popcount(remaining) == 1;
  std::size_t top_idx = parent_idx;
  std::optional<EntryMatch> sibling;
  std::optional<EntryMatch> sibling_pred;
  std::optional<PreparedChain> chain;
  std::vector<Locator> doomed;

  if (fold) {
    while (top_idx - 1 >= 1 && s.path[top_idx - 1].node.entry.is_jump()) --top_idx;
    const auto sym = static_cast<Symbol>(std::countr_zero(remaining));
    sibling = table_.search_by_parent(table_.params().extend(parent.node.hash, sym), sym,
                                      parent.node.entry.color, x);
    if (!sibling) corrupted("sibling listed in bitmap is missing");
    for (std::size_t j = top_idx + 1; j <= parent_idx; ++j)
      doomed.push_back(s.path[j].node.locator());

    if (sibling->entry.is_leaf()) {
      const SymbolKey sk = encode(keys_.key_of(sibling->entry.record));
      const auto sh = prefix_hashes(sk.symbols());
      SearchOutcome ss;
      locate(sk, sh, x, ss);
      ascend(ss.path, ss.path.size() - 1, sk, x, sibling_pred);
      if (sibling_pred && sibling_pred->locator() == leaf_id) sibling_pred = pred;
      doomed.push_back(sibling->locator());
    } else {
      std::vector<Symbol> names(enc.symbols().begin(),
                                enc.symbols().begin() + parent.depth);
      names.push_back(sym);
      std::optional<EntryMatch> cur = sibling;
      while (cur && cur->entry.is_jump()) {
        doomed.push_back(cur->locator());
        const auto label = cur->entry.jump_label();
        names.insert(names.end(), label.begin(), label.end());
        cur = table_.search_by_color(table_.params().hash_of(names), names.back(),
                                     cur->entry.child_color, x);
      }
      if (!cur) corrupted("jump child is missing");
      const Locator max_after =
          parent.node.entry.max_leaf == leaf_id ? pred_id : parent.node.entry.max_leaf;
      std::vector<Locator> created;
      try {
        const std::size_t top_depth = s.path[top_idx].depth;
        chain = prepare_chain(names, top_depth, names.size() - top_depth, cur->locator(),
                              max_after, locks, created);
      } catch (const TableFullError&) {
        for (const Locator& c : created) remove_node(c, locks);
        throw;
      }
    }
  }

  // Unlink the leaf. The dirty mark makes concurrent readers that still reach
  // it restart.
  update_node(leaf_id, locks, [](Entry& e) { e.dirty = true; });
  const Locator after = find_node(leaf_id).entry.next_leaf;
  if (pred)
    update_node(pred_id, locks, [&](Entry& e) { e.next_leaf = after; });
  else
    set_head(after, locks);
  if (!options_.fault_skip_max_leaf_update) {
    for (std::size_t j = 0; j < last; ++j) {
      update_node(s.path[j].node.locator(), locks, [&](Entry& e) {
        if (e.max_leaf == leaf_id) e.max_leaf = pred_id;
      });
    }
  }
  update_node(parent.node.locator(), locks, [&](Entry& e) { e.child_bitmap &= ~bit(edge); });
  remove_node(leaf_id, locks);

  if (!fold) return true;

  const PathStep& top = s.path[top_idx];
  if (sibling->entry.is_leaf()) {
    // The surviving leaf takes over the slot of the chain's top node.
    const Entry current = find_node(sibling->locator()).entry;
    Entry moved;
    moved.kind = NodeKind::kLeaf;
    moved.record = current.record;
    moved.next_leaf = current.next_leaf;
    redirect_leaf(sibling->locator(), top.node.locator(), sibling_pred,
                  std::span(s.path).first(top_idx), locks);
    for (const Locator& d : doomed) remove_node(d, locks);
    const EntryMatch slot = find_node(top.node.locator());
    table_.write_entry(slot.ref, keep_header(slot.entry, moved), locks);
  } else {
    commit_chain(*chain, top.node, 0, false, locks);
    for (const Locator& d : doomed) remove_node(d, locks);
  }
  return true;
}

std::size_t TrieIndex::force_relocations(std::size_t count, std::uint64_t seed) {
  std::lock_guard writer(write_mutex_);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<BucketIndex> pick_bucket(0, table_.bucket_count() - 1);
  std::size_t moved = 0;
  for (std::size_t attempts = 0; moved < count && attempts < 64 * count + 1024; ++attempts) {
    const EntryRef victim{pick_bucket(rng), static_cast<std::uint8_t>(rng() % kSlotsPerBucket)};
    if (BucketTable::is_pinned(victim) || !table_.raw_entry(victim).occupied()) continue;
    LockSet locks(table_);
    if (table_.relocate_one(victim, locks)) ++moved;
  }
  return moved;
}

IndexStats TrieIndex::stats() const {
  IndexStats st;
  table_.for_each_occupied([&](EntryRef, const Entry& e) {
    ++st.occupied_slots;
    switch (e.kind) {
      case NodeKind::kLeaf: ++st.leaves; break;
      case NodeKind::kInternal: ++st.internal_nodes; break;
      case NodeKind::kJump: ++st.jump_nodes; break;
      case NodeKind::kEmpty: break;
    }
  });
  st.bucket_count = table_.bucket_count();
  st.memory_bytes = table_.memory_bytes();
  st.relocations = table_.relocation_count();
  return st;
}

}  // namespace cuckoo_trie
