#include "navcore/world.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "navcore/errors.hpp"

namespace navcore {

namespace {

double clamp(double v, double lo, double hi) { return std::min(std::max(v, lo), hi); }

double segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double len2 = ab.squared_norm();
  if (len2 <= 0.0) return (p - a).norm();
  const double t = clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  const Vec2 closest{a.x + t * ab.x, a.y + t * ab.y};
  return (p - closest).norm();
}

}  // namespace

void validate(const WorldModel& world) {
  if (!(world.bounds.x_max > world.bounds.x_min) ||
      !(world.bounds.y_max > world.bounds.y_min)) {
    throw ConfigError("world bounds must have positive extent");
  }
  for (const Polygon& poly : world.obstacles) {
    if (poly.vertices.size() < 3) {
      throw ConfigError("obstacle polygon needs at least 3 vertices");
    }
    for (const Vec2& v : poly.vertices) {
      if (!is_finite(v)) throw ConfigError("obstacle vertex is not finite");
      if (!world.bounds.contains(v)) throw ConfigError("obstacle vertex outside bounds");
    }
    if (!polygon_is_ccw(poly)) {
      throw ConfigError("obstacle polygon must be counter-clockwise");
    }
  }
}

void validate(const VehicleParams& params) {
  if (!(params.wheelbase > 0.0)) throw ConfigError("wheelbase must be positive");
  if (!(params.max_speed > 0.0)) throw ConfigError("max_speed must be positive");
  if (!(params.max_accel > 0.0)) throw ConfigError("max_accel must be positive");
  if (!(params.max_steer > 0.0 && params.max_steer < kPi / 2.0)) {
    throw ConfigError("max_steer must lie in (0, pi/2)");
  }
  if (!(params.footprint_radius_inscribed > 0.0) ||
      !(params.footprint_radius_circumscribed >= params.footprint_radius_inscribed)) {
    throw ConfigError("footprint radii must satisfy 0 < inscribed <= circumscribed");
  }
}

double polygon_area(const Polygon& poly) {
  double twice_area = 0.0;
  const size_t n = poly.vertices.size();
  for (size_t i = 0; i < n; ++i) {
    const Vec2& a = poly.vertices[i];
    const Vec2& b = poly.vertices[(i + 1) % n];
    twice_area += a.cross(b);
  }
  return 0.5 * twice_area;
}

bool polygon_is_ccw(const Polygon& poly) { return polygon_area(poly) > 0.0; }

bool polygon_contains(const Polygon& poly, const Vec2& p) {
  const size_t n = poly.vertices.size();
  for (size_t i = 0; i < n; ++i) {
    const Vec2& a = poly.vertices[i];
    const Vec2& b = poly.vertices[(i + 1) % n];
    if ((b - a).cross(p - a) < 0.0) return false;
  }
  return true;
}

double polygon_signed_distance(const Polygon& poly, const Vec2& p) {
  double boundary = std::numeric_limits<double>::infinity();
  const size_t n = poly.vertices.size();
  for (size_t i = 0; i < n; ++i) {
    boundary = std::min(boundary,
                        segment_distance(p, poly.vertices[i], poly.vertices[(i + 1) % n]));
  }
  return polygon_contains(poly, p) ? -boundary : boundary;
}

std::optional<double> ray_segment_intersection(const Vec2& origin, const Vec2& dir,
                                               const Vec2& a, const Vec2& b) {
  const Vec2 seg = b - a;
  const double denom = dir.cross(seg);
  if (std::abs(denom) < 1e-15) return std::nullopt;  // parallel
  const Vec2 delta = a - origin;
  const double t = delta.cross(seg) / denom;
  const double u = delta.cross(dir) / denom;
  if (t < 0.0 || u < 0.0 || u > 1.0) return std::nullopt;
  return t;
}

double raycast_world(const WorldModel& world, const Vec2& origin, double angle,
                     double max_range) {
  const Vec2 dir{std::cos(angle), std::sin(angle)};
  double best = max_range;

  auto consider = [&](const Vec2& a, const Vec2& b) {
    if (auto t = ray_segment_intersection(origin, dir, a, b)) {
      if (*t < best) best = *t;
    }
  };

  const Aabb& bb = world.bounds;
  const Vec2 c0{bb.x_min, bb.y_min};
  const Vec2 c1{bb.x_max, bb.y_min};
  const Vec2 c2{bb.x_max, bb.y_max};
  const Vec2 c3{bb.x_min, bb.y_max};
  consider(c0, c1);
  consider(c1, c2);
  consider(c2, c3);
  consider(c3, c0);

  for (const Polygon& poly : world.obstacles) {
    const size_t n = poly.vertices.size();
    for (size_t i = 0; i < n; ++i) {
      consider(poly.vertices[i], poly.vertices[(i + 1) % n]);
    }
  }
  return best;
}

bool is_collision_free(const WorldModel& world, const Vec2& p, double radius) {
  return world_clearance(world, p, radius) > 0.0;
}

double world_clearance(const WorldModel& world, const Vec2& center, double radius) {
  const Aabb& bb = world.bounds;
  double nearest = std::min(std::min(center.x - bb.x_min, bb.x_max - center.x),
                            std::min(center.y - bb.y_min, bb.y_max - center.y));
  for (const Polygon& poly : world.obstacles) {
    nearest = std::min(nearest, polygon_signed_distance(poly, center));
  }
  return nearest - radius;
}

VehicleState step_vehicle(const VehicleState& state, const DriveCommand& cmd, double dt,
                          const VehicleParams& params) {
  if (!std::isfinite(cmd.v) || !std::isfinite(cmd.phi)) {
    throw DomainError("drive command is not finite");
  }
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw DomainError("time step must be positive and finite");
  }

  const double v_cmd = clamp(cmd.v, -params.max_speed, params.max_speed);
  const double dv = clamp(v_cmd - state.speed, -params.max_accel * dt, params.max_accel * dt);

  VehicleState next;
  next.speed = state.speed + dv;
  next.steer = clamp(cmd.phi, -params.max_steer, params.max_steer);

  const double omega = next.speed * std::tan(next.steer) / params.wheelbase;
  next.pose = arc_advance(state.pose, next.speed, omega, dt);
  return next;
}

}  // namespace navcore
