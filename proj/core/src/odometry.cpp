#include "navcore/odometry.hpp"

#include <cmath>

#include "navcore/errors.hpp"

namespace navcore {

OdometryDelta odometry_delta(const Pose2D& prev, const Pose2D& curr) {
  OdometryDelta delta;
  const double dx = curr.x - prev.x;
  const double dy = curr.y - prev.y;
  delta.trans = std::sqrt(dx * dx + dy * dy);
  if (delta.trans < 1e-6) {
    delta.rot1 = 0.0;
  } else {
    delta.rot1 = wrap_angle(std::atan2(dy, dx) - prev.theta);
  }
  delta.rot2 = wrap_angle(curr.theta - prev.theta - delta.rot1);
  return delta;
}

Pose2D dead_reckon(const Pose2D& pose, const Twist2D& twist_est, const ImuSample& imu,
                   double dt) {
  if (!(dt > 0.0)) throw DomainError("dt must be positive");
  return arc_advance(pose, twist_est.v, imu.yaw_rate, dt);
}

void ImuOdometer::feed(const ImuSample& imu, double dt) {
  if (!(dt > 0.0)) throw DomainError("dt must be positive");
  speed_ += imu.linear_accel * dt;
  pose_ = arc_advance(pose_, speed_, imu.yaw_rate, dt);
}

}  // namespace navcore
