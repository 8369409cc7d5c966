#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "vorosense/geometry.hpp"

namespace vorosense {

/// Counters gathered while sweeping. `circle_events_processed` counts the
/// circle events that produced a new vertex; events whose center coincides
/// with an existing vertex (cocircular sites) land in `circle_events_merged`.
struct DiagramStats {
  std::size_t n_sites = 0;
  std::size_t site_events = 0;
  std::size_t circle_events_processed = 0;
  std::size_t circle_events_discarded = 0;
  std::size_t circle_events_merged = 0;
  std::size_t pre_clip_edges = 0;
  std::chrono::nanoseconds build_wall_time{0};
};

struct VoronoiVertex {
  Point position;
  /// Ids of the sites whose circle passes through this vertex (at least 3).
  std::vector<SiteId> sites;

  friend bool operator==(const VoronoiVertex&, const VoronoiVertex&) = default;
};

/// A clipped Voronoi edge. Walking from `a` to `b`, site `left` lies on the
/// left. `vertex_a`/`vertex_b` index into the vertex list, or are -1 when the
/// endpoint was produced by clipping against the box.
struct VoronoiEdge {
  Point a;
  Point b;
  std::int32_t vertex_a = -1;
  std::int32_t vertex_b = -1;
  SiteId left = 0;
  SiteId right = 0;

  friend bool operator==(const VoronoiEdge&, const VoronoiEdge&) = default;
};

/// A site's region clipped to the diagram box: a convex polygon in
/// counter-clockwise order plus the edges bounding it in the same order.
struct VoronoiCell {
  SiteId site = 0;
  std::vector<Point> polygon;
  std::vector<std::size_t> edges;

  friend bool operator==(const VoronoiCell&, const VoronoiCell&) = default;
};

class VoronoiDiagram {
 public:
  const std::vector<Site>& sites() const { return sites_; }
  const std::vector<VoronoiVertex>& vertices() const { return vertices_; }
  const std::vector<VoronoiEdge>& edges() const { return edges_; }
  /// Cells in the order of `sites()`.
  const std::vector<VoronoiCell>& cells() const { return cells_; }
  const VoronoiCell& cell(SiteId id) const;
  const BoundingBox& clip_box() const { return clip_box_; }
  const DiagramStats& stats() const { return stats_; }

  /// Id of the site whose cell contains q. Points on a shared boundary resolve
  /// to the smallest id. Throws PointOutsideBox.
  SiteId locate_cell(Point q) const;

  /// Same sites, vertices, edges and cells. Timing is ignored.
  bool same_geometry(const VoronoiDiagram& other) const;

 private:
  friend VoronoiDiagram build_voronoi(std::span<const Site> sites, const BoundingBox& box);

  void build_locator();
  bool cell_contains(std::size_t cell_index, Point q, double tol, double* violation) const;

  std::vector<Site> sites_;
  std::vector<VoronoiVertex> vertices_;
  std::vector<VoronoiEdge> edges_;
  std::vector<VoronoiCell> cells_;
  std::vector<std::pair<SiteId, std::size_t>> id_to_cell_;
  BoundingBox clip_box_;
  DiagramStats stats_;

  // Uniform bucket grid over the box; each bucket lists the cells whose
  // bounding rectangles overlap it.
  std::size_t grid_n_ = 1;
  std::vector<std::vector<std::uint32_t>> buckets_;
  double contain_tol_ = kEpsGeom;
};

/// Sweepline construction. Sweeps by descending y; ties by ascending x, then
/// site id. Throws EmptySiteSet, SiteOutsideBox or DuplicateSite.
VoronoiDiagram build_voronoi(std::span<const Site> sites, const BoundingBox& box);

inline SiteId locate_cell(const VoronoiDiagram& diagram, Point q) {
  return diagram.locate_cell(q);
}

}  // namespace vorosense
