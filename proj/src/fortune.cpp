#include "vorosense/fortune.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <string>

#include "beachline.hpp"

namespace vorosense {
namespace {

using detail::Arc;
using detail::Beachline;

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kCollinearSine = 1e-10;

enum class EventKind : std::uint8_t { Circle = 0, Site = 1 };

struct QueuedEvent {
  double y;
  double x;
  EventKind kind;
  std::uint64_t tie;  // site id for site events, creation sequence for circles
  std::size_t index;
};

// Max-heap order: highest y first, then lowest x, circles before sites, then tie.
struct EventAfter {
  bool operator()(const QueuedEvent& a, const QueuedEvent& b) const {
    if (a.y != b.y) return a.y < b.y;
    if (a.x != b.x) return a.x > b.x;
    if (a.kind != b.kind) return a.kind > b.kind;
    return a.tie > b.tie;
  }
};

struct CircleEvent {
  Point center;
  double bottom = 0.0;
  Arc* arc = nullptr;
  bool valid = true;
};

struct RawEdge {
  std::size_t left = 0;  // site indices
  std::size_t right = 0;
  std::int32_t v0 = -1;  // end reached walking against the edge direction
  std::int32_t v1 = -1;
};

// x where the arc of `left` meets the arc of `right` (left of right on the
// beach line) for a sweepline at height l.
double breakpoint_x(Point left, Point right, double l) {
  if (left.y == right.y) return 0.5 * (left.x + right.x);
  if (left.y == l) return left.x;
  if (right.y == l) return right.x;
  const double d1 = 1.0 / (2.0 * (left.y - l));
  const double d2 = 1.0 / (2.0 * (right.y - l));
  const double dx = right.x - left.x;
  // Roots of a*t^2 + b*t + c with t measured from left.x.
  const double a = d1 - d2;
  const double b = 2.0 * dx * d2;
  const double c = 0.5 * (left.y - right.y) - dx * dx * d2;
  const double disc = std::sqrt(std::max(0.0, b * b - 4.0 * a * c));
  double t;
  if (b >= 0.0) {
    const double q = -0.5 * (b + disc);
    t = q != 0.0 ? c / q : 0.0;
  } else {
    t = (-b + disc) / (2.0 * a);
  }
  return left.x + t;
}

class Sweep {
 public:
  Sweep(const std::vector<Site>& sites) : sites_(sites) {}

  void run(DiagramStats& stats) {
    for (std::size_t i = 0; i < sites_.size(); ++i) {
      const Point p = sites_[i].position;
      queue_.push({p.y, p.x, EventKind::Site, sites_[i].id, i});
    }
    top_y_ = queue_.top().y;
    while (!queue_.empty()) {
      const QueuedEvent ev = queue_.top();
      queue_.pop();
      if (ev.kind == EventKind::Site) {
        ++stats.site_events;
        handle_site(ev.index);
      } else {
        CircleEvent& ce = circles_[ev.index];
        if (!ce.valid) continue;
        handle_circle(ce, stats);
      }
    }
    stats.circle_events_discarded = discarded_;
  }

  std::vector<VoronoiVertex>& vertices() { return vertices_; }
  std::vector<RawEdge>& edges() { return edges_; }

 private:
  Point pos(std::size_t site) const { return sites_[site].position; }

  std::int32_t new_edge(std::size_t left, std::size_t right) {
    edges_.push_back({left, right, -1, -1});
    return static_cast<std::int32_t>(edges_.size() - 1);
  }

  // The breakpoint (left arc site, right arc site) runs toward v0 when the
  // edge was created with the same left site, toward v1 otherwise.
  void finish_edge(std::int32_t edge, std::size_t left_site, std::int32_t vertex) {
    if (edge < 0) return;
    RawEdge& e = edges_[static_cast<std::size_t>(edge)];
    if (e.left == left_site) {
      e.v0 = vertex;
    } else {
      e.v1 = vertex;
    }
  }

  void invalidate(Arc* arc) {
    if (arc->circle_event >= 0) {
      CircleEvent& ce = circles_[static_cast<std::size_t>(arc->circle_event)];
      if (ce.valid) {
        ce.valid = false;
        ++discarded_;
      }
      arc->circle_event = -1;
    }
  }

  Arc* locate(double x, double l) const {
    Arc* node = beach_.root();
    for (;;) {
      if (node->prev && x < breakpoint_x(pos(node->prev->site), pos(node->site), l)) {
        if (!node->left) return node;
        node = node->left;
        continue;
      }
      if (node->next && x > breakpoint_x(pos(node->site), pos(node->next->site), l)) {
        if (!node->right) return node;
        node = node->right;
        continue;
      }
      return node;
    }
  }

  void handle_site(std::size_t site) {
    const Point p = pos(site);
    sweep_y_ = p.y;
    if (beach_.empty()) {
      beach_.set_root(beach_.make_arc(site));
      return;
    }
    if (p.y == top_y_) {
      // Every arc so far belongs to a site on the first row; parabolas are
      // still vertical rays, so the new one goes to the right end.
      Arc* last = beach_.rightmost();
      Arc* arc = beach_.make_arc(site);
      beach_.insert_after(last, arc);
      const std::int32_t e = new_edge(last->site, site);
      last->right_edge = e;
      arc->left_edge = e;
      return;
    }

    Arc* above = locate(p.x, p.y);
    invalidate(above);

    Arc* middle = beach_.make_arc(site);
    Arc* tail = beach_.make_arc(above->site);
    tail->right_edge = above->right_edge;
    beach_.insert_after(above, middle);
    beach_.insert_after(middle, tail);

    const std::int32_t e = new_edge(above->site, site);
    above->right_edge = e;
    middle->left_edge = e;
    middle->right_edge = e;
    tail->left_edge = e;

    check_circle(above);
    check_circle(tail);
  }

  void handle_circle(CircleEvent& ce, DiagramStats& stats) {
    Arc* arc = ce.arc;
    Arc* left = arc->prev;
    Arc* right = arc->next;
    sweep_y_ = ce.bottom;
    ce.valid = false;
    arc->circle_event = -1;

    const std::int32_t v = vertex_for(ce, stats);
    for (std::size_t s : {left->site, arc->site, right->site}) {
      auto& ids = vertices_[static_cast<std::size_t>(v)].sites;
      if (std::find(ids.begin(), ids.end(), sites_[s].id) == ids.end()) {
        ids.push_back(sites_[s].id);
      }
    }

    finish_edge(arc->left_edge, left->site, v);
    finish_edge(arc->right_edge, arc->site, v);

    const std::int32_t e = new_edge(left->site, right->site);
    edges_[static_cast<std::size_t>(e)].v1 = v;
    left->right_edge = e;
    right->left_edge = e;

    invalidate(left);
    invalidate(right);
    beach_.remove(arc);
    check_circle(left);
    check_circle(right);
  }

  // Cocircular sites yield several circle events with one center; they share
  // a single vertex.
  std::int32_t vertex_for(const CircleEvent& ce, DiagramStats& stats) {
    const double tol = kEpsGeom * (1.0 + std::max(std::abs(ce.center.x), std::abs(ce.center.y)));
    if (std::abs(ce.bottom - recent_y_) > tol) {
      recent_.clear();
      recent_y_ = ce.bottom;
    }
    for (std::int32_t v : recent_) {
      const Point c = vertices_[static_cast<std::size_t>(v)].position;
      if (std::abs(c.x - ce.center.x) <= tol && std::abs(c.y - ce.center.y) <= tol) {
        ++stats.circle_events_merged;
        return v;
      }
    }
    vertices_.push_back({ce.center, {}});
    ++stats.circle_events_processed;
    const auto v = static_cast<std::int32_t>(vertices_.size() - 1);
    recent_.push_back(v);
    return v;
  }

  void check_circle(Arc* arc) {
    Arc* left = arc->prev;
    Arc* right = arc->next;
    if (!left || !right || left->site == right->site) return;
    const Point a = pos(left->site);
    const Point b = pos(arc->site);
    const Point c = pos(right->site);
    // Breakpoints converge only for a clockwise triple. A near-zero sine is
    // rounding noise on collinear sites; the circle would sit far outside
    // any box and fire after the last site anyway.
    const Point ab = b - a;
    const Point ac = c - a;
    const double o = cross(ab, ac);
    if (!(o < -kCollinearSine * norm(ab) * norm(c - b))) return;
    const double d = 2.0 * cross(ab, ac);
    const double ab2 = dot(ab, ab);
    const double ac2 = dot(ac, ac);
    const Point center{a.x + (ac.y * ab2 - ab.y * ac2) / d, a.y + (ab.x * ac2 - ac.x * ab2) / d};
    if (!is_finite(center)) return;
    const double bottom = std::min(center.y - distance(center, b), sweep_y_);

    circles_.push_back({center, bottom, arc, true});
    const std::size_t idx = circles_.size() - 1;
    arc->circle_event = static_cast<std::int32_t>(idx);
    queue_.push({bottom, center.x, EventKind::Circle, idx, idx});
  }

  const std::vector<Site>& sites_;
  Beachline beach_;
  std::priority_queue<QueuedEvent, std::vector<QueuedEvent>, EventAfter> queue_;
  std::vector<CircleEvent> circles_;
  std::vector<VoronoiVertex> vertices_;
  std::vector<RawEdge> edges_;
  std::vector<std::int32_t> recent_;
  double recent_y_ = kInf;
  double top_y_ = 0.0;
  double sweep_y_ = kInf;
  std::size_t discarded_ = 0;
};

void validate_sites(std::span<const Site> sites, const BoundingBox& box) {
  if (sites.empty()) throw Error(ErrorCode::EmptySiteSet, "cannot build a diagram without sites");
  std::vector<std::size_t> order(sites.size());
  for (std::size_t i = 0; i < sites.size(); ++i) {
    const Site& s = sites[i];
    if (!is_finite(s.position) || !box.strictly_contains(s.position)) {
      throw Error(ErrorCode::SiteOutsideBox,
                  "site " + std::to_string(s.id) + " is not strictly inside the clip box");
    }
    order[i] = i;
  }
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return sites[a].id < sites[b].id;
  });
  for (std::size_t i = 1; i < order.size(); ++i) {
    if (sites[order[i]].id == sites[order[i - 1]].id) {
      throw Error(ErrorCode::DuplicateSite,
                  "site id " + std::to_string(sites[order[i]].id) + " appears twice");
    }
  }
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return sites[a].position.x < sites[b].position.x;
  });
  for (std::size_t i = 0; i < order.size(); ++i) {
    const Point p = sites[order[i]].position;
    for (std::size_t j = i + 1; j < order.size(); ++j) {
      const Point q = sites[order[j]].position;
      if (q.x - p.x > kEpsGeom) break;
      if (std::abs(q.y - p.y) <= kEpsGeom) {
        throw Error(ErrorCode::DuplicateSite, "sites " + std::to_string(sites[order[i]].id) +
                                                  " and " + std::to_string(sites[order[j]].id) +
                                                  " coincide");
      }
    }
  }
}

}  // namespace

VoronoiDiagram build_voronoi(std::span<const Site> sites, const BoundingBox& box) {
  const auto started = std::chrono::steady_clock::now();
  validate_sites(sites, box);

  VoronoiDiagram diagram;
  diagram.sites_.assign(sites.begin(), sites.end());
  diagram.clip_box_ = box;
  DiagramStats& stats = diagram.stats_;
  stats.n_sites = sites.size();

  Sweep sweep(diagram.sites_);
  sweep.run(stats);
  diagram.vertices_ = std::move(sweep.vertices());
  const auto& verts = diagram.vertices_;
  const auto& ss = diagram.sites_;

  // Clip every edge along its bisector, parametrised from the midpoint of its
  // two sites so that far-away vertices do not erode precision in the box.
  const std::size_t n = ss.size();
  std::vector<std::vector<std::size_t>> cell_edges(n);
  for (const RawEdge& raw : sweep.edges()) {
    if (raw.v0 >= 0 && raw.v0 == raw.v1) continue;  // collapsed by a vertex merge
    ++stats.pre_clip_edges;
    const Point l = ss[raw.left].position;
    const Point r = ss[raw.right].position;
    const Point mid = 0.5 * (l + r);
    const Point dir{l.y - r.y, r.x - l.x};
    const double dir2 = dot(dir, dir);
    const auto param = [&](std::int32_t v) {
      return dot(verts[static_cast<std::size_t>(v)].position - mid, dir) / dir2;
    };
    const double t0 = raw.v0 >= 0 ? param(raw.v0) : -kInf;
    const double t1 = raw.v1 >= 0 ? param(raw.v1) : kInf;
    if (!(t0 < t1)) continue;
    const auto range = clip_range(mid, dir, t0, t1, box);
    if (!range) continue;

    VoronoiEdge edge;
    edge.left = ss[raw.left].id;
    edge.right = ss[raw.right].id;
    const auto endpoint = [&](double t, double tv, std::int32_t v, Point& out, std::int32_t& idx) {
      if (v >= 0 && t == tv) {
        out = verts[static_cast<std::size_t>(v)].position;
        idx = v;
      } else {
        out = mid + dir * t;
        out.x = std::clamp(out.x, box.min().x, box.max().x);
        out.y = std::clamp(out.y, box.min().y, box.max().y);
      }
    };
    endpoint(range->first, t0, raw.v0, edge.a, edge.vertex_a);
    endpoint(range->second, t1, raw.v1, edge.b, edge.vertex_b);
    if (distance(edge.a, edge.b) <= kEpsGeom) continue;

    diagram.edges_.push_back(edge);
    cell_edges[raw.left].push_back(diagram.edges_.size() - 1);
    cell_edges[raw.right].push_back(diagram.edges_.size() - 1);
  }

  // Box corners belong to the cell(s) of their nearest site.
  const auto corners = box.corners();
  std::vector<std::vector<std::size_t>> corner_owner(4);
  for (std::size_t c = 0; c < 4; ++c) {
    double best = kInf;
    for (std::size_t i = 0; i < n; ++i) best = std::min(best, squared_distance(ss[i].position, corners[c]));
    const double slack = best * 1e-12 + kEpsGeom * kEpsGeom;
    for (std::size_t i = 0; i < n; ++i) {
      if (squared_distance(ss[i].position, corners[c]) <= best + slack) corner_owner[c].push_back(i);
    }
  }
  std::vector<std::vector<Point>> extra(n);
  for (std::size_t c = 0; c < 4; ++c) {
    for (std::size_t i : corner_owner[c]) extra[i].push_back(corners[c]);
  }

  const double scale = std::max({std::abs(box.min().x), std::abs(box.min().y),
                                 std::abs(box.max().x), std::abs(box.max().y), 1.0});
  const double merge_tol = kEpsGeom * std::max(1.0, scale * 1e-3);
  diagram.cells_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Point s = ss[i].position;
    const auto angle = [&](Point p) { return std::atan2(p.y - s.y, p.x - s.x); };
    std::vector<std::pair<double, Point>> pts;
    for (std::size_t ei : cell_edges[i]) {
      pts.emplace_back(angle(diagram.edges_[ei].a), diagram.edges_[ei].a);
      pts.emplace_back(angle(diagram.edges_[ei].b), diagram.edges_[ei].b);
    }
    for (Point p : extra[i]) pts.emplace_back(angle(p), p);
    std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first < b.first;
      if (a.second.x != b.second.x) return a.second.x < b.second.x;
      return a.second.y < b.second.y;
    });
    VoronoiCell& cell = diagram.cells_[i];
    cell.site = ss[i].id;
    for (const auto& [ang, p] : pts) {
      if (!cell.polygon.empty() && distance(cell.polygon.back(), p) <= merge_tol) continue;
      cell.polygon.push_back(p);
    }
    while (cell.polygon.size() > 1 && distance(cell.polygon.front(), cell.polygon.back()) <= merge_tol) {
      cell.polygon.pop_back();
    }

    std::vector<std::pair<double, std::size_t>> by_angle;
    for (std::size_t ei : cell_edges[i]) {
      const VoronoiEdge& e = diagram.edges_[ei];
      by_angle.emplace_back(angle(0.5 * (e.a + e.b)), ei);
    }
    std::sort(by_angle.begin(), by_angle.end());
    for (const auto& [ang, ei] : by_angle) cell.edges.push_back(ei);
  }

  diagram.id_to_cell_.reserve(n);
  for (std::size_t i = 0; i < n; ++i) diagram.id_to_cell_.emplace_back(ss[i].id, i);
  std::sort(diagram.id_to_cell_.begin(), diagram.id_to_cell_.end());

  diagram.contain_tol_ = merge_tol;
  diagram.build_locator();
  stats.build_wall_time = std::chrono::steady_clock::now() - started;
  return diagram;
}

const VoronoiCell& VoronoiDiagram::cell(SiteId id) const {
  auto it = std::lower_bound(id_to_cell_.begin(), id_to_cell_.end(), std::pair{id, std::size_t{0}});
  if (it == id_to_cell_.end() || it->first != id) {
    throw Error(ErrorCode::InvalidParams, "no site with id " + std::to_string(id));
  }
  return cells_[it->second];
}

void VoronoiDiagram::build_locator() {
  grid_n_ = std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(cells_.size()))));
  buckets_.assign(grid_n_ * grid_n_, {});
  const double gx = static_cast<double>(grid_n_) / clip_box_.width();
  const double gy = static_cast<double>(grid_n_) / clip_box_.height();
  const auto bucket = [&](double v, double lo, double g) {
    const double f = std::floor((v - lo) * g);
    return static_cast<std::size_t>(std::clamp(f, 0.0, static_cast<double>(grid_n_ - 1)));
  };
  for (std::size_t c = 0; c < cells_.size(); ++c) {
    const auto& poly = cells_[c].polygon;
    if (poly.empty()) continue;
    Point lo = poly.front();
    Point hi = poly.front();
    for (Point p : poly) {
      lo = {std::min(lo.x, p.x), std::min(lo.y, p.y)};
      hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
    }
    const std::size_t x0 = bucket(lo.x - contain_tol_, clip_box_.min().x, gx);
    const std::size_t x1 = bucket(hi.x + contain_tol_, clip_box_.min().x, gx);
    const std::size_t y0 = bucket(lo.y - contain_tol_, clip_box_.min().y, gy);
    const std::size_t y1 = bucket(hi.y + contain_tol_, clip_box_.min().y, gy);
    for (std::size_t by = y0; by <= y1; ++by) {
      for (std::size_t bx = x0; bx <= x1; ++bx) {
        buckets_[by * grid_n_ + bx].push_back(static_cast<std::uint32_t>(c));
      }
    }
  }
}

bool VoronoiDiagram::cell_contains(std::size_t cell_index, Point q, double tol,
                                   double* violation) const {
  const auto& poly = cells_[cell_index].polygon;
  double worst = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Point a = poly[i];
    const Point b = poly[(i + 1) % poly.size()];
    const double len = distance(a, b);
    if (len == 0.0) continue;
    const double signed_dist = cross(b - a, q - a) / len;
    worst = std::max(worst, -signed_dist);
  }
  if (violation) *violation = worst;
  return worst <= tol;
}

SiteId VoronoiDiagram::locate_cell(Point q) const {
  if (!is_finite(q) || !clip_box_.contains(q)) {
    throw Error(ErrorCode::PointOutsideBox, "query point lies outside the diagram box");
  }
  const auto bucket = [&](double v, double lo, double extent) {
    const double f = std::floor((v - lo) / extent * static_cast<double>(grid_n_));
    return static_cast<std::size_t>(std::clamp(f, 0.0, static_cast<double>(grid_n_ - 1)));
  };
  const std::size_t bx = bucket(q.x, clip_box_.min().x, clip_box_.width());
  const std::size_t by = bucket(q.y, clip_box_.min().y, clip_box_.height());
  const auto& candidates = buckets_[by * grid_n_ + bx];

  bool found = false;
  SiteId best = 0;
  double least_violation = kInf;
  SiteId fallback = cells_.front().site;
  for (std::uint32_t c : candidates) {
    double violation = 0.0;
    const SiteId id = cells_[c].site;
    if (cell_contains(c, q, contain_tol_, &violation)) {
      if (!found || id < best) best = id;
      found = true;
    } else if (violation < least_violation ||
               (violation == least_violation && id < fallback)) {
      least_violation = violation;
      fallback = id;
    }
  }
  return found ? best : fallback;
}

bool VoronoiDiagram::same_geometry(const VoronoiDiagram& other) const {
  return sites_ == other.sites_ && vertices_ == other.vertices_ && edges_ == other.edges_ &&
         cells_ == other.cells_ && clip_box_ == other.clip_box_;
}

}  // namespace vorosense
