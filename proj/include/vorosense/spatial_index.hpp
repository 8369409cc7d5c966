#pragma once

#include <array>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "vorosense/zcurve.hpp"

namespace vorosense {

/// One stored sensor reading. `timestamp_us` is virtual time in microseconds.
struct Record {
  MortonKey key;
  std::uint32_t site_id = 0;
  std::int64_t timestamp_us = 0;
  std::vector<std::uint8_t> payload;

  friend bool operator==(const Record&, const Record&) = default;
};

/// Records with equal keys are ordered by (timestamp, site id).
inline bool record_less(const Record& a, const Record& b) {
  if (a.key != b.key) return a.key < b.key;
  if (a.timestamp_us != b.timestamp_us) return a.timestamp_us < b.timestamp_us;
  return a.site_id < b.site_id;
}

struct LeafPage {
  std::vector<Record> records;

  MortonKey first_key() const { return records.front().key; }
  MortonKey last_key() const { return records.back().key; }
};

/// Result of a seek: the smallest stored key at or above the probe and the
/// largest key on the leaf page holding it.
struct SeekResult {
  MortonKey first_key;
  MortonKey last_key;
  std::size_t page = 0;
  std::size_t slot = 0;
};

struct IndexStats {
  std::size_t pages = 0;
  std::size_t records = 0;
  double fill_factor = 0.0;
  std::uint64_t seeks_performed = 0;
  std::uint64_t pages_scanned = 0;
  std::uint64_t subqueries_split = 0;
};

inline constexpr std::size_t kDefaultPageCapacity = 64;

/// Ordered key -> record store made of sorted leaf pages. Single writer;
/// const member functions may run concurrently between writes.
class OrderedIndex {
 public:
  explicit OrderedIndex(GridQuantizer quantizer, std::size_t page_capacity = kDefaultPageCapacity);
  OrderedIndex(const OrderedIndex& other);
  OrderedIndex& operator=(const OrderedIndex& other);
  OrderedIndex(OrderedIndex&&) = default;
  OrderedIndex& operator=(OrderedIndex&&) = default;

  const GridQuantizer& quantizer() const { return quantizer_; }
  const ZCurve& curve() const { return quantizer_.curve(); }
  std::size_t page_capacity() const { return page_capacity_; }
  std::size_t size() const { return record_count_; }
  bool empty() const { return record_count_ == 0; }
  const std::vector<LeafPage>& pages() const { return pages_; }

  /// Throws KeyOutOfGrid. A full page splits into two halves.
  void insert(Record record);

  std::optional<SeekResult> seek(MortonKey key) const;

  /// Records whose cell lies in the extent, in key order. `touched`, when
  /// given, receives every key read in access order.
  std::vector<Record> range_search(const SearchExtent& extent,
                                   std::vector<MortonKey>* touched = nullptr) const;

  IndexStats stats() const;

  /// All records in key order.
  std::vector<Record> scan_all() const;

 private:
  struct Counters {
    std::atomic<std::uint64_t> seeks{0};
    std::atomic<std::uint64_t> pages_scanned{0};
    std::atomic<std::uint64_t> splits{0};

    Counters() = default;
    Counters(const Counters& o)
        : seeks(o.seeks.load()), pages_scanned(o.pages_scanned.load()), splits(o.splits.load()) {}
    Counters& operator=(const Counters& o) {
      seeks = o.seeks.load();
      pages_scanned = o.pages_scanned.load();
      splits = o.splits.load();
      return *this;
    }
  };

  std::optional<SeekResult> seek_uncounted(MortonKey key) const;

  GridQuantizer quantizer_;
  std::size_t page_capacity_;
  std::vector<LeafPage> pages_;
  std::size_t record_count_ = 0;
  mutable Counters counters_;
};

/// Binary snapshot: "VORX1", u64 record count, then per record key (u64),
/// site id (u32), timestamp in microseconds (i64), payload length (u16) and
/// payload bytes. Integers are little-endian.
void write_snapshot(const std::filesystem::path& path, const std::vector<Record>& records);
/// Throws SnapshotFormatError or IoError.
std::vector<Record> read_snapshot(const std::filesystem::path& path);

/// Key serialized as eight big-endian bytes.
std::array<std::uint8_t, 8> key_to_bytes(MortonKey key);
MortonKey key_from_bytes(std::span<const std::uint8_t, 8> bytes);

}  // namespace vorosense
