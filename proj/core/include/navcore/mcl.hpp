#ifndef NAVCORE_MCL_HPP
#define NAVCORE_MCL_HPP

#include <vector>

#include <Eigen/Dense>

#include "navcore/distance_transform.hpp"
#include "navcore/grid.hpp"
#include "navcore/lidar.hpp"
#include "navcore/odometry.hpp"
#include "navcore/random.hpp"
#include "navcore/types.hpp"

namespace navcore {

struct Particle {
  Pose2D pose;
  double weight = 0.0;
};

// Weighted pose hypotheses plus the smoothed likelihood averages that drive
// recovery injection.
struct ParticleSet {
  std::vector<Particle> particles;
  double w_slow = 0.0;
  double w_fast = 0.0;
};

struct MotionNoiseParams {
  double a1 = 0.05;  // rotation variance per rotation squared
  double a2 = 0.01;  // rotation variance per translation squared
  double a3 = 0.02;  // translation variance per translation squared
  double a4 = 0.01;  // translation variance per rotation squared
};

struct LikelihoodFieldParams {
  double sigma = 0.2;  // meters
  double z_hit = 0.95;
  double z_rand = 0.05;
  // Stands in for the obstacle distance wherever the field has no answer
  // (endpoint outside the map, or a map with no obstacles at all).
  double max_distance = 2.0;
};

struct AugmentedParams {
  double alpha_slow = 0.001;
  double alpha_fast = 0.1;
};

struct KldParams {
  double epsilon = 0.05;      // KL-divergence bound
  double delta = 0.01;        // 1 - confidence
  double bin_xy = 0.25;       // meters
  double bin_theta = kPi / 18.0;
  int n_min = 100;
  int n_max = 5000;
};

enum class SensorModelKind { kLikelihoodField, kBeam };

struct AmclParams {
  MotionNoiseParams motion;
  AugmentedParams augmented;
  KldParams kld;
  SensorModelKind sensor = SensorModelKind::kLikelihoodField;
  LikelihoodFieldParams field;
  BeamNoiseParams beam;  // only read when sensor == kBeam
  int beam_stride = 4;
};

void validate(const MotionNoiseParams& params);
void validate(const LikelihoodFieldParams& params);
void validate(const AugmentedParams& params);
void validate(const KldParams& params);
void validate(const AmclParams& params);

// Perturbs each delta component with zero-mean Gaussian noise (variance
// a1*rot^2 + a2*trans^2 for the rotations, a3*trans^2 + a4*(rot1^2+rot2^2)
// for the translation) and composes the result onto pose. Always draws
// three normals so the stream position is independent of the coefficients.
Pose2D sample_motion_model_odometry(const Pose2D& pose, const OdometryDelta& delta,
                                    const MotionNoiseParams& noise, RandomStream& rng);

// Log-likelihood of every stride-th beam under the four-part mixture:
// truncated Gaussian around the raycast range, truncated exponential short
// return, uniform band over the top eighth of [0, z_max] for max-range
// failures, and uniform clutter. Each component integrates to one over
// [0, z_max], so the mixture is a proper density.
double beam_range_finder_model(const LaserScan& scan, const Pose2D& pose,
                               const OccupancyGrid& map, const BeamNoiseParams& params,
                               int stride = 4);

// Log-likelihood scoring each beam endpoint by its distance to the nearest
// obstacle: z_hit * N(d; 0, sigma) + z_rand / z_max. Max-range beams are
// skipped entirely.
double likelihood_field_range_finder(const LaserScan& scan, const Pose2D& pose,
                                     const DistanceField& field,
                                     const LikelihoodFieldParams& params);

// Particle count needed so the sampled approximation stays within epsilon
// of the binned posterior with confidence 1 - delta, clamped to
// [n_min, n_max]. k is the number of occupied histogram bins.
int kld_required_samples(int k, const KldParams& kld);

struct PoseEstimate {
  Pose2D pose;
  Eigen::Matrix3d covariance = Eigen::Matrix3d::Zero();
};

// Weighted mean with a circular mean for theta; covariance uses wrapped
// angular residuals.
PoseEstimate estimate_pose(const ParticleSet& set);

// One augmented-MCL iteration: motion-samples every particle, weights them
// with the configured sensor model, refreshes the w_slow / w_fast averages,
// then runs low-variance resampling in which each draw is replaced by a
// uniform random free-space pose with probability max(0, 1 - w_fast/w_slow).
// Drawing stops once the KLD-required count is met, within [n_min, n_max].
ParticleSet augmented_mcl_step(const ParticleSet& set, const OdometryDelta& delta,
                               const LaserScan& scan, const OccupancyGrid& map,
                               const DistanceField& field, const AmclParams& params,
                               RandomStream& rng);

// Uniform particles over the map's free cells.
ParticleSet initialize_uniform(const OccupancyGrid& map, int count, RandomStream& rng);

// Gaussian cloud around a known start pose.
ParticleSet initialize_around(const Pose2D& pose, int count, double xy_std,
                              double theta_std, RandomStream& rng);

// Stateful wrapper owning the map, its distance field, the particle set,
// and a forked random stream; tracks the previous odometry pose so callers
// only feed absolute odometry.
class AmclFilter {
 public:
  AmclFilter(OccupancyGrid map, const AmclParams& params, std::uint64_t seed);

  void seed_uniform(int count = 0);
  void seed_around(const Pose2D& pose, double xy_std = 0.1,
                   double theta_std = 0.05, int count = 0);

  // Advances the filter by the displacement since the previous call and
  // the new scan; returns the fused pose estimate.
  PoseEstimate update(const Pose2D& odometry, const LaserScan& scan);

  const ParticleSet& particles() const { return set_; }
  const DistanceField& field() const { return field_; }

 private:
  OccupancyGrid map_;
  DistanceField field_;
  AmclParams params_;
  ParticleSet set_;
  RandomStream rng_;
  Pose2D last_odometry_;
  bool has_odometry_ = false;
};

}  // namespace navcore

#endif  // NAVCORE_MCL_HPP
