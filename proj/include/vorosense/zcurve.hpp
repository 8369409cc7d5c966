#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include "vorosense/geometry.hpp"

namespace vorosense {

/// Interleaved-coordinate key: x bits at even positions, y bits at odd ones.
struct MortonKey {
  std::uint64_t value = 0;

  friend constexpr auto operator<=>(MortonKey, MortonKey) = default;
};

struct CellCoord {
  std::uint32_t ix = 0;
  std::uint32_t iy = 0;

  friend constexpr bool operator==(CellCoord, CellCoord) = default;
};

/// Contiguous key interval. `prefix_len` is the number of high-order key bits
/// shared by every key in an aligned block; free bits below it are zero in
/// `lo` and one in `hi`.
struct KeyRange {
  MortonKey lo;
  MortonKey hi;
  unsigned prefix_len = 0;

  friend constexpr bool operator==(KeyRange, KeyRange) = default;
};

/// Inclusive rectangle in cell coordinates.
struct SearchExtent {
  CellCoord min;
  CellCoord max;

  bool contains(CellCoord c) const {
    return c.ix >= min.ix && c.ix <= max.ix && c.iy >= min.iy && c.iy <= max.iy;
  }
  friend constexpr bool operator==(SearchExtent, SearchExtent) = default;
};

inline constexpr unsigned kDefaultBitsPerDim = 16;
inline constexpr std::size_t kUnboundedRanges = std::numeric_limits<std::size_t>::max();

/// Morton codec for a 2^bits x 2^bits grid, bits in [1, 32].
class ZCurve {
 public:
  explicit ZCurve(unsigned bits_per_dim = kDefaultBitsPerDim);

  unsigned bits_per_dim() const { return bits_; }
  unsigned key_bits() const { return 2 * bits_; }
  std::uint64_t cells_per_axis() const { return std::uint64_t{1} << bits_; }
  MortonKey max_key() const { return {key_mask_}; }

  /// Throws CoordOutOfGrid.
  MortonKey encode(std::uint32_t ix, std::uint32_t iy) const;
  MortonKey encode(CellCoord c) const { return encode(c.ix, c.iy); }
  /// Throws KeyOutOfGrid.
  CellCoord decode(MortonKey key) const;

  /// Aligned block spanned by the common high-order prefix of the extent's
  /// corner keys: the prefix zero-filled and one-filled.
  KeyRange starting_extent(const SearchExtent& extent) const;

  /// Halves an aligned block by appending 0 and 1 to its prefix.
  /// Throws RangeNotSplittable for a single-key block.
  std::pair<KeyRange, KeyRange> split_subquery(const KeyRange& range) const;

  /// Minimum and maximum keys over the extent: its lower-left and upper-right
  /// corners.
  std::pair<MortonKey, MortonKey> range_min_max_keys(const SearchExtent& extent) const;

  /// Cell rectangle covered by an aligned block.
  SearchExtent block_extent(const KeyRange& range) const;

  /// Disjoint ascending key ranges covering the extent. With an unbounded
  /// budget the cover is exact; otherwise at most `max_ranges` ranges are
  /// returned, possibly covering cells outside the extent.
  std::vector<KeyRange> decompose(const SearchExtent& extent,
                                  std::size_t max_ranges = kUnboundedRanges) const;

  void validate(const SearchExtent& extent) const;

 private:
  unsigned bits_;
  std::uint64_t key_mask_;
};

/// Low bits of `v` spread to the even bit positions.
std::uint64_t spread_bits(std::uint32_t v);
/// Inverse of spread_bits: even bit positions gathered into the low half.
std::uint32_t compact_bits(std::uint64_t v);

/// Maps world coordinates onto the cell grid of a ZCurve. Points on the
/// max edge land in the last cell.
class GridQuantizer {
 public:
  GridQuantizer(const BoundingBox& world_box, unsigned bits_per_dim = kDefaultBitsPerDim);

  const BoundingBox& world_box() const { return box_; }
  const ZCurve& curve() const { return curve_; }
  Point cell_size() const { return cell_size_; }

  /// Throws PointOutsideBox.
  CellCoord quantize(Point p) const;
  /// Lower-left corner of the cell.
  Point dequantize(CellCoord c) const;
  MortonKey key_of(Point p) const { return curve_.encode(quantize(p)); }

 private:
  BoundingBox box_;
  ZCurve curve_;
  Point cell_size_;
};

}  // namespace vorosense
