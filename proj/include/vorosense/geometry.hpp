#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "vorosense/error.hpp"

namespace vorosense {

/// Absolute tolerance used for every degeneracy test in the library.
inline constexpr double kEpsGeom = 1e-9;

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend constexpr Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
  friend constexpr Point operator*(Point a, double s) { return {a.x * s, a.y * s}; }
  friend constexpr Point operator*(double s, Point a) { return {a.x * s, a.y * s}; }
  friend constexpr bool operator==(Point a, Point b) = default;
};

constexpr double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(Point a, Point b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point a) { return std::hypot(a.x, a.y); }
inline double distance(Point a, Point b) { return norm(a - b); }
constexpr double squared_distance(Point a, Point b) { return dot(a - b, a - b); }

/// Twice the signed area of (a, b, c); positive when counter-clockwise.
constexpr double orient(Point a, Point b, Point c) { return cross(b - a, c - a); }

inline bool is_finite(Point p) { return std::isfinite(p.x) && std::isfinite(p.y); }

using SiteId = std::uint32_t;

struct Site {
  SiteId id = 0;
  Point position;

  friend bool operator==(const Site&, const Site&) = default;
};

class BoundingBox {
 public:
  BoundingBox() = default;
  /// Throws InvalidBox unless min is strictly below-left of max.
  BoundingBox(Point min, Point max);

  Point min() const { return min_; }
  Point max() const { return max_; }
  double width() const { return max_.x - min_.x; }
  double height() const { return max_.y - min_.y; }

  bool contains(Point p) const {
    return p.x >= min_.x && p.x <= max_.x && p.y >= min_.y && p.y <= max_.y;
  }
  bool strictly_contains(Point p) const {
    return p.x > min_.x && p.x < max_.x && p.y > min_.y && p.y < max_.y;
  }
  /// Corners in counter-clockwise order starting at min.
  std::vector<Point> corners() const;

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;

 private:
  Point min_{0.0, 0.0};
  Point max_{1.0, 1.0};
};

struct Segment {
  Point a;
  Point b;
};

/// An edge to be clipped: a full line, a half-line, or a finite segment.
struct Line {
  Point origin;
  Point direction;
};
struct Ray {
  Point origin;
  Point direction;
};

/// Throws CollinearInput when |orient(a, b, c)| < kEpsGeom.
Point circumcenter(Point a, Point b, Point c);

/// Smallest-id site among those at minimal Euclidean distance from q.
/// Throws EmptySiteSet.
SiteId nearest_site_bruteforce(std::span<const Site> sites, Point q);

/// Parameter interval of origin + t * direction, t in [t_min, t_max], that lies
/// inside the box. Unbounded results and empty intersections yield nullopt.
std::optional<std::pair<double, double>> clip_range(Point origin, Point direction,
                                                    double t_min, double t_max,
                                                    const BoundingBox& box);

/// Liang-Barsky clip of the parametric edge origin + t * direction for t in
/// [t_min, t_max] (infinities allowed). Empty intersection yields nullopt.
std::optional<Segment> clip_parametric(Point origin, Point direction, double t_min,
                                       double t_max, const BoundingBox& box);

std::optional<Segment> clip_to_box(const Line& line, const BoundingBox& box);
std::optional<Segment> clip_to_box(const Ray& ray, const BoundingBox& box);
std::optional<Segment> clip_to_box(const Segment& segment, const BoundingBox& box);

}  // namespace vorosense
