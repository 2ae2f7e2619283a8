#pragma once

#include <vector>

namespace heb {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

enum class HazardShape { Square, Cylinder };

// `size` is the half-extent of a square footprint or the radius of a
// cylindrical one, both measured from the centre.
struct Hazard {
  HazardShape shape = HazardShape::Cylinder;
  double cx = 0.0;
  double cy = 0.0;
  double size = 0.0;
  double height = 0.0;
};

struct GeometryConfig {
  double clearance = 2.0;  // vertical margin above hazard height
  double sepMin = 5.0;     // floor on drone-drone hover separation
  double inflate = 0.5;    // lateral margin added to every footprint
  int maxDetourDepth = 3;
};

// Radius of the disc that stands in for a hazard footprint, inflation
// included.  Squares use their circumscribed disc.
double footprint_radius(const Hazard& h, const GeometryConfig& g);

// Shortest distance from `c` to the closed segment [a, b].
double segment_point_distance(Vec2 a, Vec2 b, Vec2 c);

// Ground route from `current` to `dest` that steers around every inflated
// footprint.  The last waypoint is `dest`; empty when already there.  If no
// clear route is found within the detour budget, the direct segment is
// returned and the fallback counter is bumped.
std::vector<Vec2> calc_traj(Vec2 current, Vec2 dest, const std::vector<Hazard>& hazards,
                            const GeometryConfig& g);

// Where a drone parks: the centroid of controller and responders, pushed
// sideways (relative to the controller->centroid bearing) by `lateralSign`.
Vec2 hover_point(Vec2 controllerPos, const std::vector<Vec2>& responderPositions,
                 Vec3 otherDronePos, const GeometryConfig& g, int lateralSign);

// Cruise altitude for flying from a to b: clearance above the tallest
// hazard whose footprint the straight ground track crosses.
double cruise_altitude(Vec2 a, Vec2 b, const std::vector<Hazard>& hazards, const GeometryConfig& g);

// Drone route to its hover point: climb, avoid, arrive.
std::vector<Vec3> calc_cent_avoid_traj(Vec3 current, Vec2 controllerPos,
                                       const std::vector<Vec2>& responderPositions,
                                       Vec3 otherDronePos, const std::vector<Hazard>& hazards,
                                       const GeometryConfig& g, int lateralSign);

// Drone route back to `home`, ending on the ground.
std::vector<Vec3> calc_return_traj(Vec3 current, Vec2 home, const std::vector<Hazard>& hazards,
                                   const GeometryConfig& g);

// Per-thread count of planner calls that fell back to a blocked direct route.
int planner_fallbacks();
void reset_planner_fallbacks();

}  // namespace heb
