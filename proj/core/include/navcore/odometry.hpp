#ifndef NAVCORE_ODOMETRY_HPP
#define NAVCORE_ODOMETRY_HPP

#include <Eigen/Dense>

#include "navcore/lidar.hpp"
#include "navcore/types.hpp"

namespace navcore {

// Relative motion as rotation, straight translation, rotation.
struct OdometryDelta {
  double rot1 = 0.0;
  double trans = 0.0;
  double rot2 = 0.0;
  Eigen::Matrix3d covariance = Eigen::Matrix3d::Zero();
};

// Inverse motion model: decomposes a pose pair. Pure rotations
// (trans < 1e-6 m) put the whole heading change into rot2.
OdometryDelta odometry_delta(const Pose2D& prev, const Pose2D& curr);

// One dead-reckoning step: arc integration of the accumulated forward speed
// and the gyro yaw rate.
Pose2D dead_reckon(const Pose2D& pose, const Twist2D& twist_est, const ImuSample& imu,
                   double dt);

// Integrates IMU samples into a velocity estimate and a dead-reckoned pose
// track. Speed comes purely from accumulated forward acceleration, so it
// drifts; this is the diagnostic odometry source, not the fused one.
class ImuOdometer {
 public:
  ImuOdometer() = default;
  explicit ImuOdometer(const Pose2D& start) : pose_(start) {}

  void feed(const ImuSample& imu, double dt);

  const Pose2D& pose() const { return pose_; }
  double speed() const { return speed_; }

 private:
  Pose2D pose_;
  double speed_ = 0.0;
};

}  // namespace navcore

#endif  // NAVCORE_ODOMETRY_HPP
