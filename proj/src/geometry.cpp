#include "vorosense/geometry.hpp"

#include <algorithm>
#include <limits>
#include <string>

namespace vorosense {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::CollinearInput: return "CollinearInput";
    case ErrorCode::EmptySiteSet: return "EmptySiteSet";
    case ErrorCode::DuplicateSite: return "DuplicateSite";
    case ErrorCode::SiteOutsideBox: return "SiteOutsideBox";
    case ErrorCode::PointOutsideBox: return "PointOutsideBox";
    case ErrorCode::InvalidBox: return "InvalidBox";
    case ErrorCode::CoordOutOfGrid: return "CoordOutOfGrid";
    case ErrorCode::KeyOutOfGrid: return "KeyOutOfGrid";
    case ErrorCode::RangeNotSplittable: return "RangeNotSplittable";
    case ErrorCode::UtilizationAtOrAboveOne: return "UtilizationAtOrAboveOne";
    case ErrorCode::ConfigUtilizationTooHigh: return "ConfigUtilizationTooHigh";
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::NegativeCount: return "NegativeCount";
    case ErrorCode::InsufficientSamples: return "InsufficientSamples";
    case ErrorCode::SnapshotFormatError: return "SnapshotFormatError";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::UsageError: return "UsageError";
  }
  return "Unknown";
}

BoundingBox::BoundingBox(Point min, Point max) : min_(min), max_(max) {
  if (!is_finite(min) || !is_finite(max) || !(min.x < max.x) || !(min.y < max.y)) {
    throw Error(ErrorCode::InvalidBox, "bounding box requires finite min < max on both axes");
  }
}

std::vector<Point> BoundingBox::corners() const {
  return {min_, {max_.x, min_.y}, max_, {min_.x, max_.y}};
}

Point circumcenter(Point a, Point b, Point c) {
  const Point ab = b - a;
  const Point ac = c - a;
  const double d = 2.0 * cross(ab, ac);
  if (std::abs(d) < 2.0 * kEpsGeom) {
    throw Error(ErrorCode::CollinearInput, "points are collinear; no finite circumcenter");
  }
  const double ab2 = dot(ab, ab);
  const double ac2 = dot(ac, ac);
  return {a.x + (ac.y * ab2 - ab.y * ac2) / d, a.y + (ab.x * ac2 - ac.x * ab2) / d};
}

SiteId nearest_site_bruteforce(std::span<const Site> sites, Point q) {
  if (sites.empty()) {
    throw Error(ErrorCode::EmptySiteSet, "nearest-site query on an empty site set");
  }
  SiteId best = sites.front().id;
  double best_d2 = squared_distance(sites.front().position, q);
  for (const Site& s : sites.subspan(1)) {
    const double d2 = squared_distance(s.position, q);
    if (d2 < best_d2 || (d2 == best_d2 && s.id < best)) {
      best = s.id;
      best_d2 = d2;
    }
  }
  return best;
}

std::optional<std::pair<double, double>> clip_range(Point origin, Point direction,
                                                    double t_min, double t_max,
                                                    const BoundingBox& box) {
  double lo = t_min;
  double hi = t_max;
  // Each pair is (p, q) for the constraint p * t <= q.
  const double p[4] = {-direction.x, direction.x, -direction.y, direction.y};
  const double q[4] = {origin.x - box.min().x, box.max().x - origin.x,
                       origin.y - box.min().y, box.max().y - origin.y};
  for (int i = 0; i < 4; ++i) {
    if (p[i] == 0.0) {
      if (q[i] < 0.0) return std::nullopt;
      continue;
    }
    const double t = q[i] / p[i];
    if (p[i] < 0.0) {
      lo = std::max(lo, t);
    } else {
      hi = std::min(hi, t);
    }
  }
  if (!(lo <= hi) || std::isinf(lo) || std::isinf(hi)) return std::nullopt;
  return std::pair{lo, hi};
}

std::optional<Segment> clip_parametric(Point origin, Point direction, double t_min,
                                       double t_max, const BoundingBox& box) {
  const auto range = clip_range(origin, direction, t_min, t_max, box);
  if (!range) return std::nullopt;
  Segment out{origin + direction * range->first, origin + direction * range->second};
  // Snap round-off so endpoints never leave the box.
  for (Point* e : {&out.a, &out.b}) {
    e->x = std::clamp(e->x, box.min().x, box.max().x);
    e->y = std::clamp(e->y, box.min().y, box.max().y);
  }
  return out;
}

std::optional<Segment> clip_to_box(const Line& line, const BoundingBox& box) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  return clip_parametric(line.origin, line.direction, -inf, inf, box);
}

std::optional<Segment> clip_to_box(const Ray& ray, const BoundingBox& box) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  return clip_parametric(ray.origin, ray.direction, 0.0, inf, box);
}

std::optional<Segment> clip_to_box(const Segment& segment, const BoundingBox& box) {
  return clip_parametric(segment.a, segment.b - segment.a, 0.0, 1.0, box);
}

}  // namespace vorosense
