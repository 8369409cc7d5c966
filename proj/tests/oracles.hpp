#pragma once

// Brute-force reference implementations shared by the unit and acceptance
// tests. Each one is deliberately naive.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "vorosense/geometry.hpp"
#include "vorosense/rng.hpp"
#include "vorosense/spatial_index.hpp"
#include "vorosense/zcurve.hpp"

namespace oracle {

using namespace vorosense;

// Distance from q to the nearest bisector between its nearest site and any
// other site. Queries closer than a tolerance are boundary samples.
inline double bisector_distance(const std::vector<Site>& sites, Point q) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < sites.size(); ++i) {
    if (squared_distance(q, sites[i].position) < squared_distance(q, sites[best].position)) best = i;
  }
  double d = std::numeric_limits<double>::infinity();
  const Point s = sites[best].position;
  for (std::size_t i = 0; i < sites.size(); ++i) {
    if (i == best) continue;
    const Point t = sites[i].position;
    const double gap = squared_distance(q, t) - squared_distance(q, s);
    d = std::min(d, gap / (2.0 * distance(s, t)));
  }
  return d;
}

// Bit-by-bit interleave, independent of the magic-mask implementation.
inline std::uint64_t interleave(std::uint32_t ix, std::uint32_t iy, unsigned bits) {
  std::uint64_t key = 0;
  for (unsigned b = 0; b < bits; ++b) {
    key |= static_cast<std::uint64_t>((ix >> b) & 1u) << (2 * b);
    key |= static_cast<std::uint64_t>((iy >> b) & 1u) << (2 * b + 1);
  }
  return key;
}

inline std::vector<std::uint64_t> extent_keys(const SearchExtent& e, unsigned bits) {
  std::vector<std::uint64_t> keys;
  for (std::uint32_t y = e.min.iy; y <= e.max.iy; ++y) {
    for (std::uint32_t x = e.min.ix; x <= e.max.ix; ++x) keys.push_back(interleave(x, y, bits));
  }
  std::sort(keys.begin(), keys.end());
  return keys;
}

inline SearchExtent random_extent(Rng& rng, unsigned bits) {
  const auto n = static_cast<double>(std::uint64_t{1} << bits);
  auto coord = [&] { return static_cast<std::uint32_t>(std::floor(rng.uniform() * n)); };
  std::uint32_t x0 = coord(), x1 = coord(), y0 = coord(), y1 = coord();
  if (x0 > x1) std::swap(x0, x1);
  if (y0 > y1) std::swap(y0, y1);
  return {{x0, y0}, {x1, y1}};
}

// Linear-scan filter over a flat record list, in index order.
inline std::vector<Record> filter(std::vector<Record> records, const ZCurve& curve,
                                  const SearchExtent& e) {
  std::vector<Record> out;
  for (Record& r : records) {
    if (e.contains(curve.decode(r.key))) out.push_back(std::move(r));
  }
  std::stable_sort(out.begin(), out.end(), record_less);
  return out;
}

}  // namespace oracle
