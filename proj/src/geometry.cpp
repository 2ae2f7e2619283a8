#include "heb/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

namespace heb {

namespace {

thread_local int g_fallbacks = 0;

// Detour waypoints sit this far outside the inflated disc.
constexpr double kDetourSlack = 1.05;
constexpr double kCoincident = 1e-12;

struct Disc {
  Vec2 c;
  double r;
};

double dist(Vec2 a, Vec2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

std::vector<Disc> discs_of(const std::vector<Hazard>& hazards, const GeometryConfig& g) {
  std::vector<Disc> out;
  out.reserve(hazards.size());
  for (const auto& h : hazards) out.push_back({{h.cx, h.cy}, footprint_radius(h, g)});
  return out;
}

// First disc (by position along the segment) that the segment enters.
std::optional<Disc> first_blocker(Vec2 a, Vec2 b, const std::vector<Disc>& discs) {
  std::optional<Disc> best;
  double bestU = std::numeric_limits<double>::infinity();
  const double len = dist(a, b);
  for (const auto& d : discs) {
    if (segment_point_distance(a, b, d.c) > d.r) continue;
    const double u = len > 0 ? ((d.c.x - a.x) * (b.x - a.x) + (d.c.y - a.y) * (b.y - a.y)) / len : 0.0;
    if (u < bestU) {
      bestU = u;
      best = d;
    }
  }
  return best;
}

bool inside_any(Vec2 p, const std::vector<Disc>& discs) {
  for (const auto& d : discs)
    if (dist(p, d.c) <= d.r) return true;
  return false;
}

// Appends the route from a (exclusive) to b (inclusive).  Returns false when
// some piece is still blocked after the detour budget is spent.
bool route(Vec2 a, Vec2 b, const std::vector<Disc>& discs, int depth, std::vector<Vec2>& out) {
  auto blocker = first_blocker(a, b, discs);
  if (!blocker) {
    out.push_back(b);
    return true;
  }
  if (depth <= 0) return false;
  const Disc d = *blocker;
  const double len = dist(a, b);
  const Vec2 dir{(b.x - a.x) / len, (b.y - a.y) / len};
  // Side axis points from the disc centre towards the segment's line, so
  // the detour passes on the side the straight line already favours.
  Vec2 side{-dir.y, dir.x};
  const double offset = (a.x - d.c.x) * side.x + (a.y - d.c.y) * side.y;
  if (offset < 0) side = {-side.x, -side.y};
  const double reach = d.r * kDetourSlack + 1e-6;
  const double ua = (a.x - d.c.x) * dir.x + (a.y - d.c.y) * dir.y;
  const double ub = (b.x - d.c.x) * dir.x + (b.y - d.c.y) * dir.y;
  const double u1 = std::max(ua, -reach);
  const double u2 = std::min(ub, reach);
  const Vec2 p1{d.c.x + u1 * dir.x + reach * side.x, d.c.y + u1 * dir.y + reach * side.y};
  const Vec2 p2{d.c.x + u2 * dir.x + reach * side.x, d.c.y + u2 * dir.y + reach * side.y};
  return route(a, p1, discs, depth - 1, out) && route(p1, p2, discs, depth - 1, out) &&
         route(p2, b, discs, depth - 1, out);
}

void drop_repeats(std::vector<Vec2>& pts, Vec2 start) {
  std::vector<Vec2> kept;
  Vec2 prev = start;
  for (const auto& p : pts) {
    if (dist(p, prev) <= kCoincident) continue;
    kept.push_back(p);
    prev = p;
  }
  pts.swap(kept);
}

bool finite(Vec2 p) { return std::isfinite(p.x) && std::isfinite(p.y); }

}  // namespace

double footprint_radius(const Hazard& h, const GeometryConfig& g) {
  const double base = h.shape == HazardShape::Square ? h.size * std::sqrt(2.0) : h.size;
  return base + g.inflate;
}

double segment_point_distance(Vec2 a, Vec2 b, Vec2 c) {
  const double vx = b.x - a.x, vy = b.y - a.y;
  const double len2 = vx * vx + vy * vy;
  double s = len2 > 0 ? ((c.x - a.x) * vx + (c.y - a.y) * vy) / len2 : 0.0;
  s = std::clamp(s, 0.0, 1.0);
  return std::hypot(a.x + s * vx - c.x, a.y + s * vy - c.y);
}

std::vector<Vec2> calc_traj(Vec2 current, Vec2 dest, const std::vector<Hazard>& hazards,
                            const GeometryConfig& g) {
  if (!finite(current) || !finite(dest)) return {};
  if (dist(current, dest) <= kCoincident) return {};
  const auto discs = discs_of(hazards, g);
  std::vector<Vec2> out;
  const bool endsFree = !inside_any(current, discs) && !inside_any(dest, discs);
  if (!endsFree || !route(current, dest, discs, g.maxDetourDepth, out)) {
    ++g_fallbacks;
    return {dest};
  }
  drop_repeats(out, current);
  return out;
}

Vec2 hover_point(Vec2 controllerPos, const std::vector<Vec2>& responderPositions,
                 Vec3 otherDronePos, const GeometryConfig& g, int lateralSign) {
  Vec2 centroid = controllerPos;
  for (const auto& p : responderPositions) {
    centroid.x += p.x;
    centroid.y += p.y;
  }
  const double n = static_cast<double>(responderPositions.size() + 1);
  centroid.x /= n;
  centroid.y /= n;
  Vec2 bearing{centroid.x - controllerPos.x, centroid.y - controllerPos.y};
  double blen = std::hypot(bearing.x, bearing.y);
  if (blen <= kCoincident) {
    bearing = {0.0, 1.0};
    blen = 1.0;
  }
  const Vec2 perp{bearing.y / blen, -bearing.x / blen};
  // The tiny extra keeps the two mirrored hover points at least sepMin apart
  // after rounding.
  const double shortfall = g.sepMin - dist(centroid, {otherDronePos.x, otherDronePos.y});
  const double offset = std::max(g.sepMin / 2, shortfall) + 1e-6;
  const double s = lateralSign < 0 ? -1.0 : 1.0;
  return {centroid.x + s * offset * perp.x, centroid.y + s * offset * perp.y};
}

double cruise_altitude(Vec2 a, Vec2 b, const std::vector<Hazard>& hazards, const GeometryConfig& g) {
  double z = g.clearance;
  for (const auto& h : hazards)
    if (segment_point_distance(a, b, {h.cx, h.cy}) <= footprint_radius(h, g))
      z = std::max(z, h.height + g.clearance);
  return z;
}

namespace {

std::vector<Vec3> fly(Vec3 current, Vec2 target, double z, const std::vector<Hazard>& hazards,
                      const GeometryConfig& g) {
  std::vector<Vec3> out;
  if (current.z != z) out.push_back({current.x, current.y, z});
  for (const auto& p : calc_traj({current.x, current.y}, target, hazards, g)) out.push_back({p.x, p.y, z});
  return out;
}

}  // namespace

std::vector<Vec3> calc_cent_avoid_traj(Vec3 current, Vec2 controllerPos,
                                       const std::vector<Vec2>& responderPositions,
                                       Vec3 otherDronePos, const std::vector<Hazard>& hazards,
                                       const GeometryConfig& g, int lateralSign) {
  if (responderPositions.empty()) return {};
  const Vec2 target = hover_point(controllerPos, responderPositions, otherDronePos, g, lateralSign);
  const Vec2 here{current.x, current.y};
  const double z = cruise_altitude(here, target, hazards, g);
  if (dist(here, target) <= kCoincident && current.z == z) return {};
  return fly(current, target, z, hazards, g);
}

std::vector<Vec3> calc_return_traj(Vec3 current, Vec2 home, const std::vector<Hazard>& hazards,
                                   const GeometryConfig& g) {
  const Vec2 here{current.x, current.y};
  std::vector<Vec3> out;
  if (dist(here, home) > kCoincident)
    out = fly(current, home, cruise_altitude(here, home, hazards, g), hazards, g);
  if (!out.empty() || current.z != 0.0) out.push_back({home.x, home.y, 0.0});
  return out;
}

int planner_fallbacks() { return g_fallbacks; }
void reset_planner_fallbacks() { g_fallbacks = 0; }

}  // namespace heb
