#ifndef NAVCORE_LIDAR_HPP
#define NAVCORE_LIDAR_HPP

#include <vector>

#include "navcore/random.hpp"
#include "navcore/types.hpp"
#include "navcore/world.hpp"

namespace navcore {

struct LidarConfig {
  int beam_count = 360;
  double fov = 2.0 * kPi;
  double z_max = 8.0;
  double angular_offset = 0.0;  // sensor frame yaw relative to vehicle heading
};

// Beam i points along angle_min + i * angle_increment in the sensor frame.
// Endpoints are inclusive: the last beam sits at angle_min + fov.
struct LaserScan {
  double timestamp = 0.0;
  double angle_min = 0.0;
  double angle_increment = 0.0;
  double z_max = 0.0;
  std::vector<double> ranges;

  double angle(int i) const { return angle_min + i * angle_increment; }
  int size() const { return static_cast<int>(ranges.size()); }
};

// Four-component range error mixture: Gaussian around the true return,
// exponential short reading, max-range failure, uniform clutter.
struct BeamNoiseParams {
  double z_hit = 1.0;
  double z_short = 0.0;
  double z_max_w = 0.0;
  double z_rand = 0.0;
  double sigma_hit = 0.0;    // meters
  double lambda_short = 1.0; // 1/meters
};

struct ImuSample {
  double timestamp = 0.0;
  double yaw_rate = 0.0;      // rad/s
  double linear_accel = 0.0;  // m/s^2, body-frame forward
};

void validate(const LidarConfig& cfg);
void validate(const BeamNoiseParams& noise);

// Noise-free ranges from the vehicle pose; each beam is the distance to the
// nearest obstacle or bounds segment, capped at z_max.
LaserScan cast_scan(const WorldModel& world, const Pose2D& pose, const LidarConfig& cfg);

LaserScan corrupt_scan(const LaserScan& ideal, const BeamNoiseParams& noise,
                       RandomStream& rng);

// Synthesizes a gyro + forward-accelerometer reading from two ground-truth
// states; noise_std = {yaw rate std, accel std}.
ImuSample sample_imu(const VehicleState& prev, const VehicleState& curr, double dt,
                     double yaw_rate_noise_std, double accel_noise_std, RandomStream& rng);

// Keeps every stride-th beam starting at index 0. The result's
// angle_increment scales by stride so beam angles stay truthful.
LaserScan decimate(const LaserScan& scan, int stride);

}  // namespace navcore

#endif  // NAVCORE_LIDAR_HPP
