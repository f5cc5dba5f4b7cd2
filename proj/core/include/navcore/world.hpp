#ifndef NAVCORE_WORLD_HPP
#define NAVCORE_WORLD_HPP

#include <optional>
#include <vector>

#include "navcore/types.hpp"

namespace navcore {

// Convex polygon, vertices CCW.
struct Polygon {
  std::vector<Vec2> vertices;
};

struct Aabb {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;

  bool contains(const Vec2& p) const {
    return p.x >= x_min && p.x <= x_max && p.y >= y_min && p.y <= y_max;
  }
  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
};

// Ground-truth planar world: rectangular bounds acting as outer walls plus
// convex polygonal obstacles.
struct WorldModel {
  Aabb bounds;
  std::vector<Polygon> obstacles;
};

struct VehicleParams {
  double wheelbase = 0.3;
  double max_speed = 1.0;
  double max_accel = 2.0;
  double max_steer = 0.6;
  double footprint_radius_inscribed = 0.15;
  double footprint_radius_circumscribed = 0.25;
};

struct DriveCommand {
  double v = 0.0;    // m/s
  double phi = 0.0;  // steering angle, rad
};

struct VehicleState {
  Pose2D pose;
  double speed = 0.0;
  double steer = 0.0;
};

// Throw ConfigError if an invariant is violated.
void validate(const WorldModel& world);
void validate(const VehicleParams& params);

bool polygon_is_ccw(const Polygon& poly);
double polygon_area(const Polygon& poly);

// Inside or on the boundary.
bool polygon_contains(const Polygon& poly, const Vec2& p);

// Distance from p to the polygon boundary; negative when p is inside.
double polygon_signed_distance(const Polygon& poly, const Vec2& p);

// Smallest t >= 0 with origin + t*dir on segment [a, b], if any.
std::optional<double> ray_segment_intersection(const Vec2& origin, const Vec2& dir,
                                               const Vec2& a, const Vec2& b);

// Distance along the ray to the nearest obstacle or bounds wall, capped at max_range.
double raycast_world(const WorldModel& world, const Vec2& origin, double angle,
                     double max_range);

// True when a circle of the given radius centered at p overlaps no obstacle and
// stays inside the bounds.
bool is_collision_free(const WorldModel& world, const Vec2& p, double radius);

// Distance from the footprint circle to the nearest obstacle surface or bounds
// wall; <= 0 means the footprint touches or penetrates.
double world_clearance(const WorldModel& world, const Vec2& center, double radius);

// Advances the vehicle by one control step: the command is clamped to the
// parameter limits, then the pose follows the exact constant-curvature arc
// of the bicycle model over dt.
VehicleState step_vehicle(const VehicleState& state, const DriveCommand& cmd, double dt,
                          const VehicleParams& params);

}  // namespace navcore

#endif  // NAVCORE_WORLD_HPP
