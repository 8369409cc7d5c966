#include <gtest/gtest.h>

#include "oracles.hpp"
#include "vorosense/geometry.hpp"
#include "vorosense/rng.hpp"

using namespace vorosense;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorCode::UsageError;
}

void expect_near(Point a, Point b, double tol = 1e-12) {
  EXPECT_NEAR(a.x, b.x, tol);
  EXPECT_NEAR(a.y, b.y, tol);
}

}  // namespace

TEST(Circumcenter, RightTriangleHypotenuseMidpoint) {
  expect_near(circumcenter({0, 0}, {4, 0}, {0, 4}), {2, 2});
}

TEST(Circumcenter, CollinearRejected) {
  EXPECT_EQ(code_of([] { circumcenter({0, 0}, {1, 0}, {2, 0}); }), ErrorCode::CollinearInput);
  EXPECT_EQ(code_of([] { circumcenter({1, 1}, {1, 1}, {3, 5}); }), ErrorCode::CollinearInput);
}

TEST(Circumcenter, RandomTriplesEquidistant) {
  Rng rng(11);
  int checked = 0;
  while (checked < 100) {
    const Point a{rng.uniform(-1e4, 1e4), rng.uniform(-1e4, 1e4)};
    const Point b{rng.uniform(-1e4, 1e4), rng.uniform(-1e4, 1e4)};
    const Point c{rng.uniform(-1e4, 1e4), rng.uniform(-1e4, 1e4)};
    // Near-degenerate triangles put the center arbitrarily far away, where an
    // absolute tolerance is meaningless.
    if (std::abs(orient(a, b, c)) < 1e6) continue;
    const Point o = circumcenter(a, b, c);
    const double ra = distance(o, a);
    EXPECT_LT(std::abs(ra - distance(o, b)), 1e-9);
    EXPECT_LT(std::abs(ra - distance(o, c)), 1e-9);
    ++checked;
  }
}

TEST(BoundingBox, RejectsInvertedOrFlat) {
  EXPECT_EQ(code_of([] { BoundingBox({1, 0}, {0, 1}); }), ErrorCode::InvalidBox);
  EXPECT_EQ(code_of([] { BoundingBox({0, 0}, {1, 0}); }), ErrorCode::InvalidBox);
  EXPECT_EQ(code_of([] { BoundingBox({0, 0}, {NAN, 1}); }), ErrorCode::InvalidBox);
}

TEST(BoundingBox, CornersCounterClockwise) {
  const BoundingBox box({0, 0}, {2, 1});
  const auto c = box.corners();
  ASSERT_EQ(c.size(), 4u);
  EXPECT_EQ(c[0], (Point{0, 0}));
  EXPECT_EQ(c[1], (Point{2, 0}));
  EXPECT_EQ(c[2], (Point{2, 1}));
  EXPECT_EQ(c[3], (Point{0, 1}));
  EXPECT_TRUE(box.contains({2, 1}));
  EXPECT_FALSE(box.strictly_contains({2, 0.5}));
}

TEST(NearestSite, Examples) {
  const std::vector<Site> one{{0, {0, 0}}};
  EXPECT_EQ(nearest_site_bruteforce(one, {5, 5}), 0u);
  const std::vector<Site> two{{0, {0, 0}}, {1, {10, 0}}};
  EXPECT_EQ(nearest_site_bruteforce(two, {4, 0}), 0u);
  EXPECT_EQ(nearest_site_bruteforce(two, {5, 0}), 0u);
  EXPECT_EQ(nearest_site_bruteforce(two, {6, 0}), 1u);
}

TEST(NearestSite, TieBreakUsesIdNotOrder) {
  const std::vector<Site> sites{{7, {10, 0}}, {3, {0, 0}}};
  EXPECT_EQ(nearest_site_bruteforce(sites, {5, 0}), 3u);
}

TEST(NearestSite, EmptyRejected) {
  EXPECT_EQ(code_of([] { nearest_site_bruteforce({}, {0, 0}); }), ErrorCode::EmptySiteSet);
}

TEST(NearestSite, Deterministic) {
  Rng rng(3);
  std::vector<Site> sites;
  for (SiteId i = 0; i < 50; ++i) sites.push_back({i, {rng.uniform(0, 10), rng.uniform(0, 10)}});
  for (int k = 0; k < 200; ++k) {
    const Point q{rng.uniform(0, 10), rng.uniform(0, 10)};
    EXPECT_EQ(nearest_site_bruteforce(sites, q), nearest_site_bruteforce(sites, q));
  }
}

TEST(ClipToBox, VerticalLine) {
  const BoundingBox box({0, 0}, {10, 10});
  const auto s = clip_to_box(Line{{5, 3}, {0, 1}}, box);
  ASSERT_TRUE(s);
  expect_near(s->a, {5, 0});
  expect_near(s->b, {5, 10});
}

TEST(ClipToBox, SegmentInsideUnchanged) {
  const BoundingBox box({0, 0}, {10, 10});
  const auto s = clip_to_box(Segment{{1, 2}, {7, 8}}, box);
  ASSERT_TRUE(s);
  EXPECT_EQ(s->a, (Point{1, 2}));
  EXPECT_EQ(s->b, (Point{7, 8}));
}

TEST(ClipToBox, RaySingleWallExit) {
  const BoundingBox box({0, 0}, {10, 10});
  const auto s = clip_to_box(Ray{{5, 5}, {1, 0}}, box);
  ASSERT_TRUE(s);
  expect_near(s->a, {5, 5});
  expect_near(s->b, {10, 5});
}

TEST(ClipToBox, MissesAndPartialSegments) {
  const BoundingBox box({0, 0}, {10, 10});
  EXPECT_FALSE(clip_to_box(Line{{0, 20}, {1, 0}}, box));
  EXPECT_FALSE(clip_to_box(Ray{{5, 5}, {0, 0}}, box));
  EXPECT_FALSE(clip_to_box(Ray{{15, 5}, {1, 0}}, box));
  const auto s = clip_to_box(Segment{{-5, 5}, {5, 5}}, box);
  ASSERT_TRUE(s);
  expect_near(s->a, {0, 5});
  expect_near(s->b, {5, 5});
}

TEST(ClipToBox, RandomEndpointsStayInBox) {
  Rng rng(5);
  const BoundingBox box({-3, 2}, {7, 9});
  for (int i = 0; i < 2000; ++i) {
    const Point o{rng.uniform(-20, 20), rng.uniform(-20, 20)};
    const Point d{rng.uniform(-1, 1), rng.uniform(-1, 1)};
    for (const auto& s : {clip_to_box(Line{o, d}, box), clip_to_box(Ray{o, d}, box),
                          clip_to_box(Segment{o, o + 30.0 * d}, box)}) {
      if (!s) continue;
      for (Point p : {s->a, s->b}) {
        EXPECT_GE(p.x, box.min().x - 1e-9);
        EXPECT_LE(p.x, box.max().x + 1e-9);
        EXPECT_GE(p.y, box.min().y - 1e-9);
        EXPECT_LE(p.y, box.max().y + 1e-9);
      }
    }
  }
}

TEST(Errors, CodesHaveNames) {
  EXPECT_EQ(to_string(ErrorCode::CollinearInput), "CollinearInput");
  EXPECT_EQ(to_string(ErrorCode::SnapshotFormatError), "SnapshotFormatError");
}
