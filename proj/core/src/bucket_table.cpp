#include "cuckoo_trie/bucket_table.hpp"

#include <algorithm>
#include <cassert>
#include <cstring>
#include <sstream>

namespace cuckoo_trie {
namespace {

constexpr std::size_t kWords = kBucketPayloadBytes / 4;

inline void cpu_relax(unsigned spins) {
  if (spins > 64) std::this_thread::yield();
}

}  // namespace

bool ReadContext::validate(const BucketTable& table) const {
  for (const auto& [bucket, version] : reads_) {
    if (table.version(bucket) != version) return false;
  }
  return true;
}

BucketTable::BucketTable(std::uint64_t bucket_count, std::uint64_t seed)
    : BucketTable(HashParams(bucket_count, seed), seed) {}

BucketTable::BucketTable(HashParams params, std::uint64_t seed)
    : params_(std::move(params)),
      buckets_(std::make_unique<Bucket[]>(params_.bucket_count() + 1)),
      rng_state_(seed ^ 0x9e3779b97f4a7c15ULL) {}

BucketImage BucketTable::snapshot(BucketIndex b) const {
  const Bucket& bucket = buckets_[b];
  BucketImage image;
  std::array<std::uint32_t, kWords> words;
  for (unsigned spins = 0;; ++spins) {
    const std::uint32_t before = bucket.version.load(std::memory_order_acquire);
    if (before & 1u) {
      cpu_relax(spins);
      continue;
    }
    for (std::size_t i = 0; i < kWords; ++i)
      words[i] = bucket.words[i].load(std::memory_order_relaxed);
    std::atomic_thread_fence(std::memory_order_acquire);
    if (bucket.version.load(std::memory_order_relaxed) == before) {
      image.version = before;
      std::memcpy(image.bytes.data(), words.data(), kBucketPayloadBytes);
      return image;
    }
    cpu_relax(spins);
  }
}

BucketImage BucketTable::raw_image(BucketIndex b) const {
  const Bucket& bucket = buckets_[b];
  BucketImage image;
  image.version = bucket.version.load(std::memory_order_relaxed);
  std::array<std::uint32_t, kWords> words;
  for (std::size_t i = 0; i < kWords; ++i)
    words[i] = bucket.words[i].load(std::memory_order_relaxed);
  std::memcpy(image.bytes.data(), words.data(), kBucketPayloadBytes);
  return image;
}

BucketImage BucketTable::read(BucketIndex b, ReadContext& ctx) const {
  if (ctx.exclusive()) return raw_image(b);
  BucketImage image = snapshot(b);
  ctx.record(b, image.version);
  return image;
}

void BucketTable::store_image(BucketIndex b, const BucketImage& image) {
  Bucket& bucket = buckets_[b];
  std::array<std::uint32_t, kWords> words;
  std::memcpy(words.data(), image.bytes.data(), kBucketPayloadBytes);
  for (std::size_t i = 0; i < kWords; ++i) {
    if (bucket.words[i].load(std::memory_order_relaxed) != words[i])
      bucket.words[i].store(words[i], std::memory_order_relaxed);
  }
}

std::vector<EntryMatch> BucketTable::entries_for(HashValue h, ReadContext& ctx) const {
  std::vector<EntryMatch> out;
  const auto [b1, b2] = params_.buckets_for(h);
  const auto tag = static_cast<std::uint8_t>(params_.tag_of(h));
  const BucketImage first = read(b1, ctx);
  const BucketImage second = b2 == b1 ? first : read(b2, ctx);
  for (std::uint8_t s = 0; s < kSlotsPerBucket; ++s) {
    const Entry e = first.header(s);
    if (e.occupied() && e.tag == tag && e.is_primary)
      out.push_back({{b1, s}, first.entry(s), h, first.version});
  }
  for (std::uint8_t s = 0; s < kSlotsPerBucket; ++s) {
    const Entry e = second.header(s);
    if (e.occupied() && e.tag == tag && !e.is_primary)
      out.push_back({{b2, s}, second.entry(s), h, second.version});
  }
  return out;
}

template <typename P>
std::optional<EntryMatch> BucketTable::find_if(HashValue h, ReadContext& ctx, P&& pred) const {
  const auto [b1, b2] = params_.buckets_for(h);
  const auto tag = static_cast<std::uint8_t>(params_.tag_of(h));
  const BucketImage first = read(b1, ctx);
  for (std::uint8_t s = 0; s < kSlotsPerBucket; ++s) {
    const Entry e = first.header(s);
    if (e.occupied() && e.tag == tag && e.is_primary && pred(e))
      return EntryMatch{{b1, s}, first.entry(s), h, first.version};
  }
  const BucketImage second = b2 == b1 ? first : read(b2, ctx);
  for (std::uint8_t s = 0; s < kSlotsPerBucket; ++s) {
    const Entry e = second.header(s);
    if (e.occupied() && e.tag == tag && !e.is_primary && pred(e))
      return EntryMatch{{b2, s}, second.entry(s), h, second.version};
  }
  return std::nullopt;
}

std::optional<EntryMatch> BucketTable::search_by_parent(HashValue h, Symbol last_symbol,
                                                        Color parent_color,
                                                        ReadContext& ctx) const {
  return find_if(h, ctx, [&](const Entry& e) {
    return e.last_symbol == last_symbol && !e.via_jump && e.parent_color == parent_color;
  });
}

std::optional<EntryMatch> BucketTable::search_by_color(HashValue h, Symbol last_symbol,
                                                       Color color,
                                                       ReadContext& ctx) const {
  return find_if(h, ctx, [&](const Entry& e) {
    return e.last_symbol == last_symbol && e.color == color;
  });
}

std::optional<EntryMatch> BucketTable::resolve_locator(Locator loc, ReadContext& ctx) const {
  if (!loc) return std::nullopt;
  return find_if(loc.hash, ctx, [&](const Entry& e) { return e.color == loc.color; });
}

std::vector<EntryMatch> BucketTable::entries_for(HashValue h) const {
  ReadContext ctx;
  return entries_for(h, ctx);
}

std::optional<EntryMatch> BucketTable::search_by_parent(HashValue h, Symbol last_symbol,
                                                        Color parent_color) const {
  ReadContext ctx;
  return search_by_parent(h, last_symbol, parent_color, ctx);
}

std::optional<EntryMatch> BucketTable::search_by_color(HashValue h, Symbol last_symbol,
                                                       Color color) const {
  ReadContext ctx;
  return search_by_color(h, last_symbol, color, ctx);
}

std::optional<EntryMatch> BucketTable::resolve_locator(Locator loc) const {
  ReadContext ctx;
  return resolve_locator(loc, ctx);
}

bool BucketTable::lock_buckets(std::span<const BucketIndex> buckets,
                               std::span<const std::uint32_t> expected) {
  assert(buckets.size() == expected.size());
  assert(std::is_sorted(buckets.begin(), buckets.end()));
  for (std::size_t i = 0; i < buckets.size(); ++i) {
    std::uint32_t v = expected[i];
    const bool ok = (v & 1u) == 0 &&
                    buckets_[buckets[i]].version.compare_exchange_strong(
                        v, expected[i] + 1, std::memory_order_acq_rel);
    if (!ok) {
      unlock_buckets(buckets.first(i));
      return false;
    }
    std::atomic_thread_fence(std::memory_order_release);
  }
  return true;
}

void BucketTable::unlock_buckets(std::span<const BucketIndex> buckets) {
  for (const BucketIndex b : buckets) unlock_bucket(b);
}

void BucketTable::lock_bucket(BucketIndex b) {
  auto& version = buckets_[b].version;
  for (unsigned spins = 0;; ++spins) {
    std::uint32_t v = version.load(std::memory_order_relaxed);
    if ((v & 1u) == 0 &&
        version.compare_exchange_weak(v, v + 1, std::memory_order_acq_rel)) {
      std::atomic_thread_fence(std::memory_order_release);
      return;
    }
    cpu_relax(spins);
  }
}

void BucketTable::unlock_bucket(BucketIndex b) {
  assert(buckets_[b].version.load(std::memory_order_relaxed) & 1u);
  buckets_[b].version.fetch_add(1, std::memory_order_release);
}

Entry BucketTable::raw_entry(EntryRef ref) const { return raw_image(ref.bucket).entry(ref.slot); }

void BucketTable::write_entry(EntryRef ref, const Entry& e, LockSet& locks) {
  locks.acquire(ref.bucket);
  BucketImage image = raw_image(ref.bucket);
  e.pack(std::span<std::byte, kEntryBytes>(image.bytes.data() + ref.slot * kEntryBytes,
                                           kEntryBytes));
  store_image(ref.bucket, image);
}

void BucketTable::clear_entry(EntryRef ref, LockSet& locks) {
  write_entry(ref, Entry{}, locks);
}

void BucketTable::place_pinned(Entry e, LockSet& locks) {
  e.tag = 0;
  e.is_primary = true;
  write_entry(EntryRef{0, 0}, e, locks);
}

std::uint64_t BucketTable::anchor_word(const BucketImage& image) const noexcept {
  std::uint64_t v;
  std::memcpy(&v, image.bytes.data(), sizeof v);
  return v;
}

void BucketTable::write_anchor_word(std::uint64_t value, LockSet& locks) {
  locks.acquire(anchor_bucket());
  BucketImage image = raw_image(anchor_bucket());
  std::memcpy(image.bytes.data(), &value, sizeof value);
  store_image(anchor_bucket(), image);
}

std::optional<std::uint8_t> BucketTable::free_slot(BucketIndex b) const {
  const BucketImage image = raw_image(b);
  for (std::uint8_t s = 0; s < kSlotsPerBucket; ++s) {
    if (!image.header(s).occupied()) return s;
  }
  return std::nullopt;
}

std::uint64_t BucketTable::next_random() noexcept {
  std::uint64_t z = (rng_state_ += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

void BucketTable::move_entry(EntryRef from, EntryRef to, LockSet& locks) {
  Entry e = raw_entry(from);
  e.is_primary = !e.is_primary;
  write_entry(to, e, locks);
  clear_entry(from, locks);
  relocations_.fetch_add(1, std::memory_order_relaxed);
}

std::optional<BucketIndex> BucketTable::relocate_one(EntryRef victim, LockSet& locks) {
  if (is_pinned(victim)) return std::nullopt;
  const Entry e = raw_entry(victim);
  assert(e.occupied());
  const BucketIndex alt = params_.alternate_bucket(victim.bucket, e.tag, e.is_primary);
  const auto slot = free_slot(alt);
  if (!slot) return std::nullopt;
  move_entry(victim, EntryRef{alt, *slot}, locks);
  return alt;
}

EntryMatch BucketTable::insert_entry(HashValue h, Entry proto, LockSet& locks) {
  assert(proto.occupied());
  const auto [b1, b2] = params_.buckets_for(h);
  const auto tag = static_cast<std::uint8_t>(params_.tag_of(h));

  ReadContext exclusive(ReadContext::Mode::kExclusive);
  unsigned used = 0;
  for (const auto& m : entries_for(h, exclusive)) used |= 1u << m.entry.color;
  Color color = 0;
  while (color < kColorCount && (used >> color & 1u)) ++color;
  if (color == kColorCount)
    throw TableFullError(
        "cuckoo_trie: eight nodes share one hash value; raise the initial capacity");

  proto.tag = tag;
  proto.color = color;

  auto place = [&](BucketIndex b, std::uint8_t slot, bool primary) {
    proto.is_primary = primary;
    const EntryRef ref{b, slot};
    write_entry(ref, proto, locks);
    return EntryMatch{ref, proto, h, 0};
  };

  if (const auto s = free_slot(b1)) return place(b1, *s, true);
  if (const auto s = free_slot(b2)) return place(b2, *s, false);

  // Random walk: pick victims round-robin, remembering the path, until some
  // victim's alternate bucket has room. Then shift entries backwards along the
  // path so no entry is ever absent from both of its buckets.
  std::vector<EntryRef> path;
  unsigned kicks = 0;
  while (kicks < kMaxKicks) {
    const bool from_primary = (next_random() & 1u) != 0;
    BucketIndex cur = from_primary ? b1 : b2;
    path.clear();
    while (kicks < kMaxKicks) {
      std::optional<std::uint8_t> pick;
      for (unsigned k = 0; k < kSlotsPerBucket && !pick; ++k) {
        const auto s = static_cast<std::uint8_t>((round_robin_ + k) % kSlotsPerBucket);
        const EntryRef cand{cur, s};
        if (is_pinned(cand) || std::find(path.begin(), path.end(), cand) != path.end())
          continue;
        pick = s;
      }
      ++round_robin_;
      if (!pick) break;
      const EntryRef victim{cur, *pick};
      path.push_back(victim);
      ++kicks;
      const Entry ve = raw_entry(victim);
      const BucketIndex alt = params_.alternate_bucket(cur, ve.tag, ve.is_primary);
      if (const auto s = free_slot(alt)) {
        EntryRef dest{alt, *s};
        for (auto it = path.rbegin(); it != path.rend(); ++it) {
          move_entry(*it, dest, locks);
          dest = *it;
        }
        return place(path.front().bucket, path.front().slot, from_primary);
      }
      cur = alt;
    }
  }
  throw TableFullError(
      "cuckoo_trie: hash table full after " + std::to_string(kMaxKicks) +
      " relocations; raise the initial capacity");
}

std::size_t BucketTable::occupied_slots() const {
  std::size_t n = 0;
  for_each_occupied([&](EntryRef, const Entry&) { ++n; });
  return n;
}

std::string BucketTable::dump() const {
  std::ostringstream os;
  for_each_occupied([&](EntryRef ref, const Entry& e) {
    os << ref.bucket << ' ' << int{ref.slot} << ' ' << to_string(e.kind) << ' '
       << int{e.tag} << ' ' << (e.is_primary ? 1 : 0) << ' ' << int{e.last_symbol} << ' '
       << int{e.color} << ' ' << int{e.parent_color} << '\n';
  });
  return os.str();
}

bool LockSet::holds(BucketIndex b) const noexcept {
  return std::find(held_.begin(), held_.end(), b) != held_.end();
}

void LockSet::acquire(BucketIndex b) {
  if (holds(b)) return;
  table_.lock_bucket(b);
  held_.push_back(b);
}

bool LockSet::acquire_all(std::span<const BucketIndex> buckets,
                          std::span<const std::uint32_t> expected) {
  std::vector<std::pair<BucketIndex, std::uint32_t>> want;
  for (std::size_t i = 0; i < buckets.size(); ++i) {
    if (!holds(buckets[i])) want.emplace_back(buckets[i], expected[i]);
  }
  std::sort(want.begin(), want.end());
  // Duplicates must agree on the version they expect.
  std::vector<BucketIndex> order;
  std::vector<std::uint32_t> versions;
  for (std::size_t i = 0; i < want.size(); ++i) {
    if (!order.empty() && order.back() == want[i].first) {
      if (versions.back() != want[i].second) return false;
      continue;
    }
    order.push_back(want[i].first);
    versions.push_back(want[i].second);
  }
  if (!table_.lock_buckets(order, versions)) return false;
  held_.insert(held_.end(), order.begin(), order.end());
  return true;
}

void LockSet::release() {
  table_.unlock_buckets(held_);
  held_.clear();
}

}  // namespace cuckoo_trie
