#include "vorosense/dynamic.hpp"

#include <algorithm>
#include <cmath>

#include "vorosense/rng.hpp"

namespace vorosense {
namespace {

// Mirror `v` back into [lo, hi], flipping `velocity` once per wall hit.
double reflect(double v, double lo, double hi, double& velocity) {
  const double span = hi - lo;
  for (int guard = 0; guard < 64 && (v < lo || v > hi); ++guard) {
    if (v > hi) {
      v = 2.0 * hi - v;
    } else {
      v = 2.0 * lo - v;
    }
    velocity = -velocity;
  }
  if (v < lo || v > hi) v = lo + std::fmod(std::abs(v - lo), span);
  // Keep sites strictly inside so the diagram builder accepts them.
  const double inset = span * 1e-9;
  return std::clamp(v, lo + inset, hi - inset);
}

Point bounce(Point p, const BoundingBox& box, Point& velocity) {
  return {reflect(p.x, box.min().x, box.max().x, velocity.x),
          reflect(p.y, box.min().y, box.max().y, velocity.y)};
}

}  // namespace

std::vector<Site> DynamicWorld::positions() const {
  std::vector<Site> out;
  out.reserve(sites.size());
  for (const MovingSite& s : sites) out.push_back(s.site);
  return out;
}

DynamicWorld step(const DynamicWorld& world) {
  DynamicWorld next = world;
  next.tick = world.tick + 1;
  const BoundingBox& box = world.clip_box;
  for (std::size_t i = 0; i < next.sites.size(); ++i) {
    MovingSite& ms = next.sites[i];
    Point& p = ms.site.position;
    if (auto* cv = std::get_if<ConstantVelocity>(&ms.motion)) {
      p = bounce(p + cv->velocity * world.dt, box, cv->velocity);
    } else if (auto* wl = std::get_if<WaypointLoop>(&ms.motion)) {
      if (wl->waypoints.empty()) continue;
      double budget = wl->speed * world.dt;
      // Walk toward the current target, rolling over to the next waypoint
      // whenever one is reached within this tick.
      for (std::size_t hops = 0; budget > 0.0 && hops <= wl->waypoints.size(); ++hops) {
        const Point target = wl->waypoints[wl->target % wl->waypoints.size()];
        const double d = distance(p, target);
        if (d > budget) {
          p = p + (target - p) * (budget / d);
          break;
        }
        p = target;
        budget -= d;
        wl->target = (wl->target + 1) % wl->waypoints.size();
      }
      Point unused{0.0, 0.0};
      p = bounce(p, box, unused);
    } else if (auto* rw = std::get_if<RandomWalk>(&ms.motion)) {
      Rng rng(derive_seed(derive_seed(world.rng_seed, world.tick), i));
      const double u = rng.uniform(-1.0, 1.0);
      const double v = rng.uniform(-1.0, 1.0);
      Point unused{0.0, 0.0};
      p = bounce(p + Point{u, v} * rw->step_scale, box, unused);
    }
  }
  return next;
}

std::vector<FrameRecord> run_dynamic(const DynamicWorld& world, std::size_t n_ticks) {
  if (n_ticks == 0) throw Error(ErrorCode::InvalidParams, "run_dynamic needs at least one tick");
  std::vector<FrameRecord> frames;
  frames.reserve(n_ticks);
  DynamicWorld current = world;
  for (std::size_t k = 0; k < n_ticks; ++k) {
    if (k > 0) current = step(current);
    FrameRecord frame;
    frame.tick = current.tick;
    frame.sites = current.positions();
    auto diagram = std::make_shared<const VoronoiDiagram>(build_voronoi(frame.sites, current.clip_box));
    frame.stats = diagram->stats();
    frame.diagram = std::move(diagram);
    frames.push_back(std::move(frame));
  }
  return frames;
}

}  // namespace vorosense
