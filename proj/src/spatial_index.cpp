#include "vorosense/spatial_index.hpp"

#include <algorithm>
#include <string>

namespace vorosense {
namespace {

bool overlaps(const SearchExtent& a, const SearchExtent& b) {
  return a.min.ix <= b.max.ix && b.min.ix <= a.max.ix && a.min.iy <= b.max.iy &&
         b.min.iy <= a.max.iy;
}

bool inside(const SearchExtent& inner, const SearchExtent& outer) {
  return inner.min.ix >= outer.min.ix && inner.max.ix <= outer.max.ix &&
         inner.min.iy >= outer.min.iy && inner.max.iy <= outer.max.iy;
}

SearchExtent intersect(const SearchExtent& a, const SearchExtent& b) {
  return {{std::max(a.min.ix, b.min.ix), std::max(a.min.iy, b.min.iy)},
          {std::min(a.max.ix, b.max.ix), std::min(a.max.iy, b.max.iy)}};
}

}  // namespace

OrderedIndex::OrderedIndex(GridQuantizer quantizer, std::size_t page_capacity)
    : quantizer_(std::move(quantizer)), page_capacity_(page_capacity) {
  if (page_capacity_ < 2) {
    throw Error(ErrorCode::InvalidParams, "page capacity must be at least 2");
  }
}

OrderedIndex::OrderedIndex(const OrderedIndex& other) = default;
OrderedIndex& OrderedIndex::operator=(const OrderedIndex& other) = default;

void OrderedIndex::insert(Record record) {
  if (record.key > curve().max_key()) {
    throw Error(ErrorCode::KeyOutOfGrid,
                "record key " + std::to_string(record.key.value) + " is outside the grid");
  }
  ++record_count_;
  if (pages_.empty()) {
    pages_.push_back({{std::move(record)}});
    return;
  }
  auto page_it = std::lower_bound(pages_.begin(), pages_.end(), record,
                                  [](const LeafPage& p, const Record& r) {
                                    return record_less(p.records.back(), r);
                                  });
  if (page_it == pages_.end()) --page_it;
  auto& recs = page_it->records;
  recs.insert(std::upper_bound(recs.begin(), recs.end(), record, record_less), std::move(record));
  if (recs.size() > page_capacity_) {
    const auto half = static_cast<std::ptrdiff_t>(recs.size() / 2);
    LeafPage upper;
    upper.records.assign(std::make_move_iterator(recs.begin() + half),
                         std::make_move_iterator(recs.end()));
    recs.erase(recs.begin() + half, recs.end());
    pages_.insert(page_it + 1, std::move(upper));
  }
}

std::optional<SeekResult> OrderedIndex::seek_uncounted(MortonKey key) const {
  auto page_it = std::lower_bound(pages_.begin(), pages_.end(), key,
                                  [](const LeafPage& p, MortonKey k) { return p.last_key() < k; });
  if (page_it == pages_.end()) return std::nullopt;
  const auto& recs = page_it->records;
  auto slot = std::lower_bound(recs.begin(), recs.end(), key,
                               [](const Record& r, MortonKey k) { return r.key < k; });
  return SeekResult{slot->key, page_it->last_key(),
                    static_cast<std::size_t>(page_it - pages_.begin()),
                    static_cast<std::size_t>(slot - recs.begin())};
}

std::optional<SeekResult> OrderedIndex::seek(MortonKey key) const {
  counters_.seeks.fetch_add(1, std::memory_order_relaxed);
  return seek_uncounted(key);
}

std::vector<Record> OrderedIndex::range_search(const SearchExtent& extent,
                                               std::vector<MortonKey>* touched) const {
  const ZCurve& z = curve();
  z.validate(extent);
  std::vector<Record> out;
  if (pages_.empty()) return out;

  const auto note = [&](MortonKey k) {
    if (touched) touched->push_back(k);
  };
  // Reads forward from a seek position up to `max_key`, crossing into later
  // pages while keys stay in range.
  const auto read_forward = [&](const SeekResult& at, MortonKey max_key, bool filter) {
    std::size_t slot = at.slot;
    for (std::size_t p = at.page; p < pages_.size(); ++p, slot = 0) {
      const auto& recs = pages_[p].records;
      if (recs[slot].key > max_key) {
        note(recs[slot].key);
        return;
      }
      counters_.pages_scanned.fetch_add(1, std::memory_order_relaxed);
      for (; slot < recs.size(); ++slot) {
        const Record& r = recs[slot];
        note(r.key);
        if (r.key > max_key) return;
        if (!filter || extent.contains(z.decode(r.key))) out.push_back(r);
      }
    }
  };

  // Aligned blocks popped in ascending key order, so the index is only ever
  // read forward.
  std::vector<KeyRange> stack{z.starting_extent(extent)};
  while (!stack.empty()) {
    const KeyRange q = stack.back();
    stack.pop_back();
    const SearchExtent rect = z.block_extent(q);
    if (!overlaps(rect, extent)) continue;

    // The minimum point of the subquery inside the extent is its lower-left
    // corner; the maximum is its upper-right corner.
    const SearchExtent part = intersect(rect, extent);
    const MortonKey qmin = z.encode(part.min);
    const MortonKey qmax = z.encode(part.max);
    const auto found = seek(qmin);
    if (!found) break;  // nothing stored at or above qmin
    note(found->first_key);

    if (found->first_key > qmax) continue;  // no stored key inside this subquery
    if (inside(rect, extent)) {
      read_forward(*found, q.hi, false);
      continue;
    }
    if (found->last_key > qmax) {
      // The rest of the subquery lives on this page: read it and filter.
      read_forward(*found, qmax, true);
      continue;
    }
    if (found->last_key == qmax) {
      // Page ends exactly at the subquery max. Equal keys may spill onto the
      // next page, so the read continues forward while keys equal qmax.
      read_forward(*found, qmax, true);
      continue;
    }
    const auto [zero, one] = z.split_subquery(q);
    counters_.splits.fetch_add(1, std::memory_order_relaxed);
    stack.push_back(one);
    stack.push_back(zero);
  }
  return out;
}

IndexStats OrderedIndex::stats() const {
  IndexStats s;
  s.pages = pages_.size();
  s.records = record_count_;
  s.fill_factor = pages_.empty() ? 0.0
                                 : static_cast<double>(record_count_) /
                                       static_cast<double>(pages_.size() * page_capacity_);
  s.seeks_performed = counters_.seeks.load();
  s.pages_scanned = counters_.pages_scanned.load();
  s.subqueries_split = counters_.splits.load();
  return s;
}

std::vector<Record> OrderedIndex::scan_all() const {
  std::vector<Record> out;
  out.reserve(record_count_);
  for (const LeafPage& p : pages_) out.insert(out.end(), p.records.begin(), p.records.end());
  return out;
}

}  // namespace vorosense
