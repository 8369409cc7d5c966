#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "oracles.hpp"
#include "vorosense/spatial_index.hpp"

using namespace vorosense;

namespace {

GridQuantizer grid(unsigned bits) { return GridQuantizer(BoundingBox({0, 0}, {1, 1}), bits); }

Record at(const ZCurve& z, std::uint32_t x, std::uint32_t y, std::uint32_t site = 0, std::int64_t ts = 0) {
  return {z.encode(x, y), site, ts, {static_cast<std::uint8_t>(x), static_cast<std::uint8_t>(y)}};
}

std::vector<Record> random_records(std::size_t n, unsigned bits, std::uint64_t seed) {
  const ZCurve z(bits);
  Rng rng(seed);
  const auto cells = static_cast<double>(z.cells_per_axis());
  std::vector<Record> out;
  for (std::size_t i = 0; i < n; ++i) {
    const auto x = static_cast<std::uint32_t>(rng.uniform() * cells);
    const auto y = static_cast<std::uint32_t>(rng.uniform() * cells);
    out.push_back(at(z, x, y, static_cast<std::uint32_t>(i % 97), static_cast<std::int64_t>(rng.next() % 1000)));
  }
  return out;
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("vorosense_test_" + name);
}

}  // namespace

TEST(Insert, FirstRecordMakesOnePage) {
  OrderedIndex idx(grid(4), 4);
  const IndexStats fresh = idx.stats();
  EXPECT_EQ(fresh.pages, 0u);
  EXPECT_EQ(fresh.records, 0u);
  EXPECT_EQ(fresh.seeks_performed, 0u);
  EXPECT_EQ(fresh.pages_scanned, 0u);
  EXPECT_EQ(fresh.subqueries_split, 0u);
  idx.insert(at(idx.curve(), 1, 1));
  EXPECT_EQ(idx.pages().size(), 1u);
  EXPECT_EQ(idx.size(), 1u);
}

TEST(Insert, CapacityPlusOneSplits) {
  const std::size_t p = 8;
  OrderedIndex idx(grid(8), p);
  for (std::uint64_t k = 0; k <= p; ++k) idx.insert({{k * 3}, 0, 0, {}});
  ASSERT_EQ(idx.pages().size(), 2u);
  EXPECT_LT(idx.pages()[0].last_key(), idx.pages()[1].first_key());
  EXPECT_EQ(idx.pages()[0].first_key().value, 0u);
  for (const auto& page : idx.pages()) {
    EXPECT_GE(page.records.size(), 1u);
    EXPECT_LE(page.records.size(), p);
  }
}

TEST(Insert, KeyOutOfGrid) {
  OrderedIndex idx(grid(2));
  try {
    idx.insert({{16}, 0, 0, {}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::KeyOutOfGrid);
  }
}

TEST(Insert, RandomInsertsStaySorted) {
  OrderedIndex idx(grid(16), 16);
  auto records = random_records(10000, 16, 1);
  for (const Record& r : records) idx.insert(r);
  const auto all = idx.scan_all();
  std::stable_sort(records.begin(), records.end(), record_less);
  ASSERT_EQ(all.size(), records.size());
  EXPECT_TRUE(std::is_sorted(all.begin(), all.end(), record_less));
  for (const auto& page : idx.pages()) {
    EXPECT_LE(page.records.size(), 16u);
    EXPECT_FALSE(page.records.empty());
  }
  for (std::size_t i = 0; i < all.size(); ++i) {
    EXPECT_EQ(all[i].key, records[i].key);
    EXPECT_EQ(all[i].timestamp_us, records[i].timestamp_us);
  }
  for (const Record& r : records) {
    const auto s = idx.seek(r.key);
    ASSERT_TRUE(s);
    ASSERT_EQ(s->first_key, r.key);
  }
}

TEST(Seek, Examples) {
  OrderedIndex idx(grid(4));
  EXPECT_FALSE(idx.seek({0}));
  idx.insert({{5}, 0, 0, {}});
  idx.insert({{9}, 0, 0, {}});
  const auto s = idx.seek({6});
  ASSERT_TRUE(s);
  EXPECT_EQ(s->first_key.value, 9u);
  EXPECT_EQ(s->last_key.value, 9u);
  EXPECT_EQ(idx.seek({2})->first_key.value, 5u);
  EXPECT_FALSE(idx.seek({10}));
}

TEST(Seek, MatchesSortedArrayOracle) {
  for (std::size_t cap : {2u, 3u, 8u, 64u}) {
    OrderedIndex idx(grid(6), cap);
    Rng rng(cap);
    std::vector<std::uint64_t> keys;
    for (int i = 0; i < 700; ++i) {
      const std::uint64_t k = rng.next() % 4096;
      keys.push_back(k);
      idx.insert({{k}, 0, i, {}});
    }
    std::sort(keys.begin(), keys.end());
    for (std::uint64_t probe = 0; probe <= 4096; ++probe) {
      const auto it = std::lower_bound(keys.begin(), keys.end(), probe);
      const auto s = idx.seek({probe});
      if (it == keys.end()) {
        ASSERT_FALSE(s);
        continue;
      }
      ASSERT_TRUE(s);
      ASSERT_EQ(s->first_key.value, *it);
      const auto& page = idx.pages()[s->page];
      ASSERT_EQ(s->last_key, page.last_key());
      ASSERT_EQ(page.records[s->slot].key.value, *it);
    }
  }
}

TEST(RangeSearch, EmptyIndex) {
  OrderedIndex idx(grid(4));
  EXPECT_TRUE(idx.range_search({{0, 0}, {15, 15}}).empty());
}

TEST(RangeSearch, FourCellExample) {
  OrderedIndex idx(grid(2), 2);
  const ZCurve& z = idx.curve();
  for (auto [x, y] : {std::pair{1u, 2u}, {0u, 1u}, {1u, 1u}, {0u, 2u}, {3u, 3u}, {2u, 0u}}) idx.insert(at(z, x, y));
  const auto r = idx.range_search({{0, 1}, {1, 2}});
  ASSERT_EQ(r.size(), 4u);
  EXPECT_EQ(r[0].key.value, 2u);
  EXPECT_EQ(r[1].key.value, 3u);
  EXPECT_EQ(r[2].key.value, 8u);
  EXPECT_EQ(r[3].key.value, 9u);
}

TEST(RangeSearch, DuplicateKeysAcrossPages) {
  OrderedIndex idx(grid(3), 2);
  const ZCurve& z = idx.curve();
  for (int i = 0; i < 9; ++i) idx.insert(at(z, 2, 3, i, 100 - i));
  idx.insert(at(z, 3, 3));
  idx.insert(at(z, 1, 1));
  const auto r = idx.range_search({{2, 3}, {2, 3}});
  ASSERT_EQ(r.size(), 9u);
  EXPECT_TRUE(std::is_sorted(r.begin(), r.end(), record_less));
  const auto r2 = idx.range_search({{0, 0}, {2, 3}});
  EXPECT_EQ(r2.size(), 10u);
}

TEST(RangeSearch, RandomAgainstLinearScan) {
  for (std::size_t cap : {2u, 5u, 64u}) {
    OrderedIndex idx(grid(6), cap);
    const auto records = random_records(3000, 6, 10 + cap);
    for (const Record& r : records) idx.insert(r);
    Rng rng(cap);
    for (int i = 0; i < 300; ++i) {
      const SearchExtent e = oracle::random_extent(rng, 6);
      std::vector<MortonKey> touched;
      const auto got = idx.range_search(e, &touched);
      ASSERT_EQ(got, oracle::filter(records, idx.curve(), e));
      ASSERT_TRUE(std::is_sorted(touched.begin(), touched.end()));
    }
  }
}

TEST(RangeSearch, FullGridReturnsEverything) {
  OrderedIndex idx(grid(16));
  const auto records = random_records(2000, 16, 3);
  for (const Record& r : records) idx.insert(r);
  EXPECT_EQ(idx.range_search({{0, 0}, {65535, 65535}}).size(), 2000u);
}

TEST(RangeSearch, AlignedQuadrantNeedsNoSplit) {
  OrderedIndex idx(grid(4), 4);
  const ZCurve& z = idx.curve();
  for (std::uint32_t x = 0; x < 8; ++x) {
    for (std::uint32_t y = 0; y < 8; ++y) idx.insert(at(z, x, y));
  }
  const auto r = idx.range_search({{0, 0}, {7, 7}});
  EXPECT_EQ(r.size(), 64u);
  EXPECT_EQ(idx.stats().subqueries_split, 0u);
}

TEST(RangeSearch, CountersStrictlyIncrease) {
  OrderedIndex idx(grid(6), 4);
  for (const Record& r : random_records(500, 6, 4)) idx.insert(r);
  Rng rng(9);
  IndexStats prev = idx.stats();
  for (int i = 0; i < 50; ++i) {
    idx.range_search(oracle::random_extent(rng, 6));
    const IndexStats now = idx.stats();
    EXPECT_GT(now.seeks_performed, prev.seeks_performed);
    EXPECT_GE(now.pages_scanned, prev.pages_scanned);
    EXPECT_GE(now.subqueries_split, prev.subqueries_split);
    prev = now;
  }
}

TEST(RangeSearch, WorkBoundOnSmallGrids) {
  for (std::size_t cap : {2u, 4u, 8u}) {
    OrderedIndex idx(grid(4), cap);
    for (const Record& r : random_records(150, 4, cap)) idx.insert(r);
    const ZCurve& z = idx.curve();
    for (std::uint32_t x0 = 0; x0 < 16; ++x0) {
      for (std::uint32_t x1 = x0; x1 < 16; ++x1) {
        for (std::uint32_t y0 = 0; y0 < 16; y0 += 3) {
          for (std::uint32_t y1 = y0; y1 < 16; y1 += 2) {
            const SearchExtent e{{x0, y0}, {x1, y1}};
            const auto ranges = z.decompose(e);
            std::size_t overlapping = 0;
            for (const auto& page : idx.pages()) {
              for (const auto& r : ranges) {
                if (page.first_key() <= r.hi && r.lo <= page.last_key()) {
                  ++overlapping;
                  break;
                }
              }
            }
            const auto before = idx.stats().pages_scanned;
            idx.range_search(e);
            ASSERT_LE(idx.stats().pages_scanned - before, overlapping + ranges.size());
          }
        }
      }
    }
  }
}

TEST(RangeSearch, CopyIsIndependent) {
  OrderedIndex a(grid(4));
  a.insert(at(a.curve(), 1, 1));
  OrderedIndex b = a;
  b.insert(at(b.curve(), 2, 2));
  EXPECT_EQ(a.size(), 1u);
  EXPECT_EQ(b.size(), 2u);
}

TEST(InsertScaling, RoughlyNLogN) {
  std::vector<double> ratios;
  for (std::size_t n : {20000u, 40000u, 80000u, 160000u}) {
    const auto records = random_records(n, 16, n);
    double best = 1e300;
    for (int rep = 0; rep < 3; ++rep) {
      OrderedIndex idx(grid(16));
      const auto t0 = std::chrono::steady_clock::now();
      for (const Record& r : records) idx.insert(r);
      best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    }
    ratios.push_back(best / (static_cast<double>(n) * std::log2(static_cast<double>(n))));
  }
  const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
  EXPECT_LT(*hi / *lo, 3.0);
}

TEST(Snapshot, RoundTrip) {
  const auto path = temp_file("roundtrip.snap");
  auto records = random_records(300, 16, 5);
  records[0].payload.assign(1000, 0xAB);
  records[1].payload.clear();
  records[2].timestamp_us = -7;
  write_snapshot(path, records);
  EXPECT_EQ(read_snapshot(path), records);
  std::filesystem::remove(path);
}

TEST(Snapshot, LayoutIsLittleEndian) {
  const auto path = temp_file("layout.snap");
  write_snapshot(path, {Record{{0x0102030405060708ull}, 0xA0B0C0D0u, 0x11, {0xEE}}});
  std::ifstream f(path, std::ios::binary);
  const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(f)), {});
  const std::vector<unsigned char> expected{'V', 'O', 'R', 'X', '1', 1, 0, 0, 0, 0, 0, 0, 0,
                                            8, 7, 6, 5, 4, 3, 2, 1, 0xD0, 0xC0, 0xB0, 0xA0,
                                            0x11, 0, 0, 0, 0, 0, 0, 0, 1, 0, 0xEE};
  EXPECT_EQ(bytes, expected);
  std::filesystem::remove(path);
}

TEST(Snapshot, RejectsCorruptFiles) {
  const auto path = temp_file("corrupt.snap");
  auto expect_format_error = [&](const std::string& contents) {
    std::ofstream(path, std::ios::binary) << contents;
    try {
      read_snapshot(path);
      ADD_FAILURE() << "accepted corrupt snapshot";
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::SnapshotFormatError);
    }
  };
  expect_format_error("");
  expect_format_error("VORX2");
  expect_format_error(std::string("VORX1\x01\0\0\0\0\0\0\0", 13));
  write_snapshot(path, random_records(3, 8, 1));
  std::ofstream(path, std::ios::binary | std::ios::app) << "x";
  try {
    read_snapshot(path);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SnapshotFormatError);
  }
  std::filesystem::remove(path);
  try {
    read_snapshot(path);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::IoError);
  }
}

TEST(KeyBytes, BigEndian) {
  const auto b = key_to_bytes({0x0102030405060708ull});
  EXPECT_EQ(b[0], 1);
  EXPECT_EQ(b[7], 8);
  EXPECT_EQ(key_from_bytes(b).value, 0x0102030405060708ull);
}
