#pragma once

#include <cstdint>
#include <memory>
#include <variant>
#include <vector>

#include "vorosense/fortune.hpp"

namespace vorosense {

struct ConstantVelocity {
  Point velocity;  // world units per second
};

struct WaypointLoop {
  std::vector<Point> waypoints;
  double speed = 1.0;
  std::size_t target = 0;
};

/// Each tick adds step_scale * (u, v) with u, v uniform in [-1, 1].
struct RandomWalk {
  double step_scale = 1.0;
};

/// Walls reflect specularly for every variant.
using MotionModel = std::variant<ConstantVelocity, WaypointLoop, RandomWalk>;

struct MovingSite {
  Site site;
  MotionModel motion;
};

struct DynamicWorld {
  std::vector<MovingSite> sites;
  BoundingBox clip_box;
  std::uint64_t tick = 0;
  double dt = 0.1;  // virtual seconds
  std::uint64_t rng_seed = 0;

  std::vector<Site> positions() const;
};

/// Advances every site over dt. Random steps depend only on
/// (rng_seed, tick, site index), so the world stays a pure value.
DynamicWorld step(const DynamicWorld& world);

struct FrameRecord {
  std::uint64_t tick = 0;
  std::vector<Site> sites;
  DiagramStats stats;
  std::shared_ptr<const VoronoiDiagram> diagram;
};

/// Frame k holds the diagram of the world after k steps, rebuilt from
/// scratch. Throws InvalidParams for zero ticks; build errors propagate.
std::vector<FrameRecord> run_dynamic(const DynamicWorld& world, std::size_t n_ticks);

}  // namespace vorosense
