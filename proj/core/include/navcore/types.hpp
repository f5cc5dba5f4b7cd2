#ifndef NAVCORE_TYPES_HPP
#define NAVCORE_TYPES_HPP

#include <cmath>
#include <cstdint>

namespace navcore {

inline constexpr double kPi = 3.14159265358979323846;

// Normalizes an angle to (-pi, pi].
inline double wrap_angle(double a) {
  double r = std::remainder(a, 2.0 * kPi);
  if (r <= -kPi) r += 2.0 * kPi;
  return r;
}

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  double dot(const Vec2& o) const { return x * o.x + y * o.y; }
  double cross(const Vec2& o) const { return x * o.y - y * o.x; }
  double norm() const { return std::hypot(x, y); }
  double squared_norm() const { return x * x + y * y; }
};

// Planar pose (x, y, heading). theta is kept in (-pi, pi] by the
// operations that write it.
struct Pose2D {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;

  Vec2 position() const { return {x, y}; }
  Vec2 heading() const { return {std::cos(theta), std::sin(theta)}; }
};

// Planar velocity: forward speed and yaw rate.
struct Twist2D {
  double v = 0.0;
  double omega = 0.0;
};

// Body frame -> world frame for a point.
inline Vec2 transform_point(const Pose2D& frame, const Vec2& p) {
  const double c = std::cos(frame.theta);
  const double s = std::sin(frame.theta);
  return {frame.x + c * p.x - s * p.y, frame.y + s * p.x + c * p.y};
}

// Pose composition a (+) b: b expressed in a's frame, result in world frame.
inline Pose2D compose(const Pose2D& a, const Pose2D& b) {
  const Vec2 p = transform_point(a, {b.x, b.y});
  return {p.x, p.y, wrap_angle(a.theta + b.theta)};
}

inline Pose2D inverse(const Pose2D& a) {
  const double c = std::cos(a.theta);
  const double s = std::sin(a.theta);
  return {-c * a.x - s * a.y, s * a.x - c * a.y, wrap_angle(-a.theta)};
}

// Relative pose of b in a's frame: a (+) result == b.
inline Pose2D relative_pose(const Pose2D& a, const Pose2D& b) {
  return compose(inverse(a), b);
}

// Exact constant-curvature advance of a pose by (v, omega) over dt.
inline Pose2D arc_advance(const Pose2D& p, double v, double omega, double dt) {
  Pose2D out = p;
  if (std::abs(omega) <= 1e-6) {
    // Second-order series; the exact form divides a cancelling sine
    // difference by omega and loses ~6 digits in this range.
    const double c = std::cos(p.theta);
    const double s = std::sin(p.theta);
    const double half = 0.5 * omega * dt;
    out.x += v * dt * (c - half * s);
    out.y += v * dt * (s + half * c);
    out.theta = wrap_angle(p.theta + omega * dt);
    return out;
  }
  const double th1 = p.theta + omega * dt;
  out.x += v / omega * (std::sin(th1) - std::sin(p.theta));
  out.y += v / omega * (std::cos(p.theta) - std::cos(th1));
  out.theta = wrap_angle(th1);
  return out;
}

inline bool is_finite(double v) { return std::isfinite(v); }
inline bool is_finite(const Vec2& v) { return std::isfinite(v.x) && std::isfinite(v.y); }
inline bool is_finite(const Pose2D& p) {
  return std::isfinite(p.x) && std::isfinite(p.y) && std::isfinite(p.theta);
}
inline bool is_finite(const Twist2D& t) { return std::isfinite(t.v) && std::isfinite(t.omega); }

}  // namespace navcore

#endif  // NAVCORE_TYPES_HPP
