#include "vorosense/zcurve.hpp"

#include <algorithm>
#include <bit>
#include <string>

namespace vorosense {

std::uint64_t spread_bits(std::uint32_t v) {
  std::uint64_t x = v;
  x = (x | (x << 16)) & 0x0000FFFF0000FFFFull;
  x = (x | (x << 8)) & 0x00FF00FF00FF00FFull;
  x = (x | (x << 4)) & 0x0F0F0F0F0F0F0F0Full;
  x = (x | (x << 2)) & 0x3333333333333333ull;
  x = (x | (x << 1)) & 0x5555555555555555ull;
  return x;
}

std::uint32_t compact_bits(std::uint64_t v) {
  std::uint64_t x = v & 0x5555555555555555ull;
  x = (x | (x >> 1)) & 0x3333333333333333ull;
  x = (x | (x >> 2)) & 0x0F0F0F0F0F0F0F0Full;
  x = (x | (x >> 4)) & 0x00FF00FF00FF00FFull;
  x = (x | (x >> 8)) & 0x0000FFFF0000FFFFull;
  x = (x | (x >> 16)) & 0x00000000FFFFFFFFull;
  return static_cast<std::uint32_t>(x);
}

namespace {

// Mask with the low `n` bits set, n in [0, 64].
constexpr std::uint64_t low_mask(unsigned n) {
  return n >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n) - 1;
}

unsigned common_prefix_len(std::uint64_t lo, std::uint64_t hi, unsigned key_bits) {
  return key_bits - static_cast<unsigned>(std::bit_width(lo ^ hi));
}

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

ZCurve::ZCurve(unsigned bits_per_dim) : bits_(bits_per_dim), key_mask_(low_mask(2 * bits_per_dim)) {
  if (bits_per_dim < 1 || bits_per_dim > 32) {
    throw Error(ErrorCode::InvalidParams,
                "bits per dimension must be in [1, 32], got " + std::to_string(bits_per_dim));
  }
}

MortonKey ZCurve::encode(std::uint32_t ix, std::uint32_t iy) const {
  if (ix >= cells_per_axis() || iy >= cells_per_axis()) {
    throw Error(ErrorCode::CoordOutOfGrid, "cell (" + std::to_string(ix) + ", " +
                                               std::to_string(iy) + ") is outside a " +
                                               std::to_string(bits_) + "-bit grid");
  }
  return {spread_bits(ix) | (spread_bits(iy) << 1)};
}

CellCoord ZCurve::decode(MortonKey key) const {
  if (key.value > key_mask_) {
    throw Error(ErrorCode::KeyOutOfGrid, "key " + std::to_string(key.value) +
                                             " exceeds a " + std::to_string(bits_) +
                                             "-bit grid");
  }
  return {compact_bits(key.value), compact_bits(key.value >> 1)};
}

void ZCurve::validate(const SearchExtent& extent) const {
  const auto n = cells_per_axis();
  if (extent.max.ix >= n || extent.max.iy >= n) {
    throw Error(ErrorCode::CoordOutOfGrid, "search extent exceeds the grid");
  }
  if (extent.min.ix > extent.max.ix || extent.min.iy > extent.max.iy) {
    throw Error(ErrorCode::InvalidParams, "search extent min must not exceed max");
  }
}

KeyRange ZCurve::starting_extent(const SearchExtent& extent) const {
  validate(extent);
  const std::uint64_t kmin = encode(extent.min).value;
  const std::uint64_t kmax = encode(extent.max).value;
  const unsigned prefix = common_prefix_len(kmin, kmax, key_bits());
  const std::uint64_t free_mask = low_mask(key_bits() - prefix);
  return {{kmin & ~free_mask}, {(kmin & ~free_mask) | free_mask}, prefix};
}

std::pair<KeyRange, KeyRange> ZCurve::split_subquery(const KeyRange& range) const {
  if (range.prefix_len >= key_bits()) {
    throw Error(ErrorCode::RangeNotSplittable,
                "range [" + std::to_string(range.lo.value) + ", " +
                    std::to_string(range.hi.value) + "] holds a single key");
  }
  const unsigned child_free = key_bits() - range.prefix_len - 1;
  const std::uint64_t half = low_mask(child_free);
  const KeyRange zero{range.lo, {range.lo.value | half}, range.prefix_len + 1};
  const KeyRange one{{zero.hi.value + 1}, range.hi, range.prefix_len + 1};
  return {zero, one};
}

std::pair<MortonKey, MortonKey> ZCurve::range_min_max_keys(const SearchExtent& extent) const {
  validate(extent);
  return {encode(extent.min), encode(extent.max)};
}

SearchExtent ZCurve::block_extent(const KeyRange& range) const {
  return {decode(range.lo), decode(range.hi)};
}

std::vector<KeyRange> ZCurve::decompose(const SearchExtent& extent,
                                        std::size_t max_ranges) const {
  validate(extent);
  max_ranges = std::max<std::size_t>(max_ranges, 1);
  std::vector<KeyRange> out;
  const auto emit = [&](KeyRange r) {
    if (!out.empty() && out.back().hi.value + 1 == r.lo.value) {
      out.back().hi = r.hi;
      out.back().prefix_len = common_prefix_len(out.back().lo.value, r.hi.value, key_bits());
    } else {
      out.push_back(r);
    }
  };

  // Children are pushed 1 then 0 so blocks pop in ascending key order.
  std::vector<KeyRange> stack{starting_extent(extent)};
  while (!stack.empty()) {
    const KeyRange q = stack.back();
    stack.pop_back();
    const SearchExtent rect = block_extent(q);
    if (!overlaps(rect, extent)) continue;
    if (inside(rect, extent)) {
      emit(q);
      continue;
    }
    if (out.size() + stack.size() + 2 > max_ranges) {
      // Out of budget: emit the block's part of the extent unsplit. Its
      // lower-left and upper-right corners bound every key inside it.
      const SearchExtent clipped = intersect(rect, extent);
      const MortonKey lo = encode(clipped.min);
      const MortonKey hi = encode(clipped.max);
      emit({lo, hi, common_prefix_len(lo.value, hi.value, key_bits())});
      continue;
    }
    const auto [zero, one] = split_subquery(q);
    stack.push_back(one);
    stack.push_back(zero);
  }
  return out;
}

GridQuantizer::GridQuantizer(const BoundingBox& world_box, unsigned bits_per_dim)
    : box_(world_box), curve_(bits_per_dim) {
  const double n = static_cast<double>(curve_.cells_per_axis());
  cell_size_ = {box_.width() / n, box_.height() / n};
}

CellCoord GridQuantizer::quantize(Point p) const {
  if (!is_finite(p) || !box_.contains(p)) {
    throw Error(ErrorCode::PointOutsideBox, "point lies outside the quantizer world box");
  }
  const double last = static_cast<double>(curve_.cells_per_axis() - 1);
  const double n = static_cast<double>(curve_.cells_per_axis());
  const double fx = std::floor((p.x - box_.min().x) / box_.width() * n);
  const double fy = std::floor((p.y - box_.min().y) / box_.height() * n);
  return {static_cast<std::uint32_t>(std::clamp(fx, 0.0, last)),
          static_cast<std::uint32_t>(std::clamp(fy, 0.0, last))};
}

Point GridQuantizer::dequantize(CellCoord c) const {
  const double n = static_cast<double>(curve_.cells_per_axis());
  return {box_.min().x + box_.width() * (static_cast<double>(c.ix) / n),
          box_.min().y + box_.height() * (static_cast<double>(c.iy) / n)};
}

}  // namespace vorosense
