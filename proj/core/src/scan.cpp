#include "cuckoo_trie/scan.hpp"

namespace cuckoo_trie {

LeafHit TrieIndex::hit(const EntryMatch& leaf) const {
  return {leaf, keys_.key_of(leaf.entry.record), leaf.entry.record};
}

bool TrieIndex::read_head(ReadContext& ctx, std::optional<EntryMatch>& out) const {
  const BucketImage image = table_.read(table_.anchor_bucket(), ctx);
  const Locator head = Locator::unpack(table_.anchor_word(image));
  if (!head) {
    out.reset();
    return true;
  }
  out = table_.resolve_locator(head, ctx);
  return out && out->entry.is_leaf() && (ctx.exclusive() || !out->entry.dirty);
}

bool TrieIndex::follow_next(const EntryMatch& leaf, ReadContext& ctx,
                            std::optional<EntryMatch>& out) const {
  const Locator next = leaf.entry.next_leaf;
  if (!next) {
    out.reset();
    return true;
  }
  out = table_.resolve_locator(next, ctx);
  return out && out->entry.is_leaf() && (ctx.exclusive() || !out->entry.dirty);
}

bool TrieIndex::range_start_once(const SymbolKey& key, std::span<const HashValue> hashes,
                                 std::string_view raw_key, bool inclusive, ReadContext& ctx,
                                 std::optional<EntryMatch>& out) const {
  SearchOutcome s;
  if (!locate(key, hashes, ctx, s)) return false;
  if (s.stop == SearchOutcome::Stop::kLeaf) {
    const EntryMatch& leaf = s.terminal().node;
    if (keys_.key_of(leaf.entry.record) == raw_key) {
      if (!ctx.exclusive() && leaf.entry.dirty) return false;
      if (inclusive) {
        out = leaf;
        return true;
      }
      return follow_next(leaf, ctx, out);
    }
  }
  std::optional<EntryMatch> pred;
  if (!predecessor_of(s, key, raw_key, ctx, pred)) return false;
  return pred ? follow_next(*pred, ctx, out) : read_head(ctx, out);
}

std::optional<LeafHit> TrieIndex::predecessor(std::string_view key) const {
  if (key.empty()) return std::nullopt;
  const SymbolKey enc = encode(key);
  const auto hashes = prefix_hashes(enc.symbols());
  ReadContext ctx;
  SearchOutcome s;
  std::optional<EntryMatch> out;
  for (;;) {
    ctx.clear();
    if (!locate(enc, hashes, ctx, s)) continue;
    if (!predecessor_of(s, enc, key, ctx, out)) continue;
    if (ctx.validate(table_)) break;
  }
  if (!out) return std::nullopt;
  return hit(*out);
}

std::optional<LeafHit> TrieIndex::range_start(std::string_view key, bool inclusive) const {
  if (key.empty()) return first();  // every stored key is non-empty, so > ""
  const SymbolKey enc = encode(key);
  const auto hashes = prefix_hashes(enc.symbols());
  ReadContext ctx;
  std::optional<EntryMatch> out;
  for (;;) {
    ctx.clear();
    if (range_start_once(enc, hashes, key, inclusive, ctx, out) && ctx.validate(table_)) break;
  }
  if (!out) return std::nullopt;
  return hit(*out);
}

std::optional<LeafHit> TrieIndex::first() const {
  ReadContext ctx;
  std::optional<EntryMatch> out;
  for (;;) {
    ctx.clear();
    if (read_head(ctx, out) && ctx.validate(table_)) break;
  }
  if (!out) return std::nullopt;
  return hit(*out);
}

std::vector<std::pair<std::string_view, RecordRef>> TrieIndex::scan(std::string_view key,
                                                                    std::size_t count) const {
  std::vector<std::pair<std::string_view, RecordRef>> out;
  if (count == 0) return out;
  out.reserve(count);
  for (RangeIterator it(*this, key); it.valid() && out.size() < count; it.next())
    out.emplace_back(it.key(), it.record());
  return out;
}

RangeIterator::RangeIterator(const TrieIndex& index, std::string_view start, bool inclusive,
                             std::optional<std::string> end)
    : index_(index), end_(std::move(end)) {
  seek(start, inclusive);
}

void RangeIterator::seek(std::string_view key, bool inclusive) {
  settle(index_.range_start(key, inclusive));
}

void RangeIterator::settle(std::optional<LeafHit> hit) {
  if (!hit || (end_ && hit->key > *end_)) {
    current_.reset();
    return;
  }
  current_ = hit->leaf;
  key_ = hit->key;
  prefetch_successor();
}

void RangeIterator::prefetch_successor() const {
  if (!index_.options().prefetch) return;
  const Locator next = current_->entry.next_leaf;
  if (!next) return;
  const auto [b1, b2] = index_.table().params().buckets_for(next.hash);
  index_.table().prefetch(b1);
  index_.table().prefetch(b2);
}

void RangeIterator::next() {
  if (!current_) return;
  const BucketTable& table = index_.table();
  const EntryMatch cur = *current_;

  // The successor is trustworthy only if the current leaf's bucket did not
  // change while it was being followed; otherwise search again from the root.
  ReadContext ctx;
  std::optional<EntryMatch> succ;
  const bool ok = table.version(cur.ref.bucket) == cur.version &&
                  index_.follow_next(cur, ctx, succ) && ctx.validate(table) &&
                  table.version(cur.ref.bucket) == cur.version;
  if (!ok) {
    ++resyncs_;
    const std::string last(key_);
    seek(last, false);
    return;
  }
  if (!succ) {
    current_.reset();
    return;
  }
  const std::string_view succ_key = index_.keys().key_of(succ->entry.record);
  if (succ_key <= key_) {
    ++resyncs_;
    const std::string last(key_);
    seek(last, false);
    return;
  }
  settle(LeafHit{*succ, succ_key, succ->entry.record});
}

}  // namespace cuckoo_trie
