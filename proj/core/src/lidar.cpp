#include "navcore/lidar.hpp"

#include <cmath>

#include "navcore/errors.hpp"

namespace navcore {

void validate(const LidarConfig& cfg) {
  if (cfg.beam_count < 2) throw ConfigError("beam_count must be >= 2");
  if (!(cfg.fov > 0.0 && cfg.fov <= 2.0 * kPi + 1e-12)) {
    throw ConfigError("fov must lie in (0, 2*pi]");
  }
  if (!(cfg.z_max > 0.0)) throw ConfigError("z_max must be positive");
}

void validate(const BeamNoiseParams& noise) {
  if (noise.z_hit < 0.0 || noise.z_short < 0.0 || noise.z_max_w < 0.0 ||
      noise.z_rand < 0.0) {
    throw ConfigError("mixture weights must be non-negative");
  }
  const double sum = noise.z_hit + noise.z_short + noise.z_max_w + noise.z_rand;
  if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("mixture weights must sum to 1");
  if (noise.sigma_hit < 0.0) throw ConfigError("sigma_hit must be >= 0");
  if (!(noise.lambda_short > 0.0)) throw ConfigError("lambda_short must be positive");
}

LaserScan cast_scan(const WorldModel& world, const Pose2D& pose, const LidarConfig& cfg) {
  validate(cfg);
  const Vec2 origin = pose.position();
  if (!world.bounds.contains(origin)) {
    throw EmbeddedPoseError("sensor pose outside world bounds");
  }
  for (const Polygon& poly : world.obstacles) {
    if (polygon_contains(poly, origin)) {
      throw EmbeddedPoseError("sensor pose inside an obstacle");
    }
  }

  LaserScan scan;
  scan.angle_min = cfg.angular_offset - cfg.fov / 2.0;
  scan.angle_increment = cfg.fov / (cfg.beam_count - 1);
  scan.z_max = cfg.z_max;
  scan.ranges.resize(cfg.beam_count);
  for (int i = 0; i < cfg.beam_count; ++i) {
    const double angle = pose.theta + scan.angle(i);
    scan.ranges[i] = raycast_world(world, origin, angle, cfg.z_max);
  }
  return scan;
}

LaserScan corrupt_scan(const LaserScan& ideal, const BeamNoiseParams& noise,
                       RandomStream& rng) {
  validate(noise);
  LaserScan out = ideal;
  const double z_max = ideal.z_max;
  for (double& r : out.ranges) {
    const double true_range = r;
    const double pick = rng.uniform();
    if (pick < noise.z_hit) {
      if (noise.sigma_hit == 0.0) {
        r = true_range;
      } else {
        // Rejection-sample the Gaussian truncated to the sensor range.
        double sample;
        do {
          sample = rng.gaussian(true_range, noise.sigma_hit);
        } while (sample < 0.0 || sample > z_max);
        r = sample;
      }
    } else if (pick < noise.z_hit + noise.z_short) {
      // Exponential truncated to [0, true_range] by inverse CDF.
      const double cap = 1.0 - std::exp(-noise.lambda_short * true_range);
      const double u = rng.uniform() * cap;
      r = -std::log(1.0 - u) / noise.lambda_short;
      if (r > true_range) r = true_range;
    } else if (pick < noise.z_hit + noise.z_short + noise.z_max_w) {
      r = z_max;
    } else {
      r = rng.uniform() * z_max;
    }
  }
  return out;
}

ImuSample sample_imu(const VehicleState& prev, const VehicleState& curr, double dt,
                     double yaw_rate_noise_std, double accel_noise_std, RandomStream& rng) {
  if (!(dt > 0.0)) throw DomainError("dt must be positive");
  ImuSample sample;
  sample.yaw_rate = wrap_angle(curr.pose.theta - prev.pose.theta) / dt;
  sample.linear_accel = (curr.speed - prev.speed) / dt;
  if (yaw_rate_noise_std > 0.0) {
    sample.yaw_rate += rng.gaussian(0.0, yaw_rate_noise_std);
  }
  if (accel_noise_std > 0.0) {
    sample.linear_accel += rng.gaussian(0.0, accel_noise_std);
  }
  return sample;
}

LaserScan decimate(const LaserScan& scan, int stride) {
  if (stride < 1) throw DomainError("stride must be >= 1");
  if (stride == 1) return scan;
  LaserScan out;
  out.timestamp = scan.timestamp;
  out.angle_min = scan.angle_min;
  out.angle_increment = scan.angle_increment * stride;
  out.z_max = scan.z_max;
  for (int i = 0; i < scan.size(); i += stride) {
    out.ranges.push_back(scan.ranges[i]);
  }
  return out;
}

}  // namespace navcore
