#include "navcore/mcl.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <unordered_set>
#include <utility>

#include "navcore/errors.hpp"

namespace navcore {

namespace {

// Four-part range density; every component integrates to one over
// [0, z_max], so any convex mixture is a proper density there.
double beam_density(double z, double expected, double z_max,
                    const BeamNoiseParams& p) {
  double density = 0.0;
  if (p.z_hit > 0.0) {
    const double root2 = std::sqrt(2.0);
    const double normalizer =
        0.5 * (std::erf((z_max - expected) / (p.sigma_hit * root2)) -
               std::erf(-expected / (p.sigma_hit * root2)));
    if (normalizer > 0.0) {
      const double d = (z - expected) / p.sigma_hit;
      density += p.z_hit * std::exp(-0.5 * d * d) /
                 (p.sigma_hit * std::sqrt(2.0 * kPi) * normalizer);
    }
  }
  if (p.z_short > 0.0 && expected > 0.0 && z <= expected) {
    const double normalizer = 1.0 - std::exp(-p.lambda_short * expected);
    density += p.z_short * p.lambda_short * std::exp(-p.lambda_short * z) / normalizer;
  }
  if (p.z_max_w > 0.0 && z >= z_max * 0.875) {
    density += p.z_max_w * 8.0 / z_max;
  }
  if (p.z_rand > 0.0) {
    density += p.z_rand / z_max;
  }
  return density;
}

// Acklam's rational approximation polished with one Halley step through
// erfc; accurate to well under 1e-8 across the open interval.
double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("quantile needs p in (0, 1)");
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  const double p_low = 0.02425;
  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
  const double u = e * std::sqrt(2.0 * kPi) * std::exp(0.5 * x * x);
  return x - u / (1.0 + 0.5 * x * u);
}

// 21/21/22-bit packed histogram bin; offsets keep each field nonnegative
// for any pose a desk-scale map can hold.
std::uint64_t kld_bin_key(const Pose2D& pose, const KldParams& kld) {
  const auto bx = static_cast<std::int64_t>(std::floor(pose.x / kld.bin_xy));
  const auto by = static_cast<std::int64_t>(std::floor(pose.y / kld.bin_xy));
  const auto bt =
      static_cast<std::int64_t>(std::floor(wrap_angle(pose.theta) / kld.bin_theta));
  return (static_cast<std::uint64_t>(bx + (1 << 20)) << 43) |
         (static_cast<std::uint64_t>(by + (1 << 20)) << 22) |
         static_cast<std::uint64_t>(bt + (1 << 21));
}

std::vector<GridIndex> free_cells(const OccupancyGrid& map) {
  std::vector<GridIndex> cells;
  for (int row = 0; row < map.height(); ++row) {
    for (int col = 0; col < map.width(); ++col) {
      const GridIndex idx{row, col};
      if (map.observed(idx) && map.probability(idx) < 0.25) cells.push_back(idx);
    }
  }
  return cells;
}

Pose2D random_free_pose(const OccupancyGrid& map, const std::vector<GridIndex>& cells,
                        RandomStream& rng) {
  const GridIndex idx =
      cells[static_cast<size_t>(rng.uniform_int(0, static_cast<int>(cells.size()) - 1))];
  const Vec2 c = map.cell_center(idx);
  const double half = 0.5 * map.resolution();
  return {c.x + rng.uniform(-half, half), c.y + rng.uniform(-half, half),
          rng.uniform(-kPi, kPi)};
}

}  // namespace

void validate(const MotionNoiseParams& params) {
  if (!(params.a1 >= 0.0 && params.a2 >= 0.0 && params.a3 >= 0.0 && params.a4 >= 0.0)) {
    throw ConfigError("motion noise coefficients must be nonnegative");
  }
}

void validate(const LikelihoodFieldParams& params) {
  if (!(params.sigma > 0.0)) throw ConfigError("likelihood field sigma must be positive");
  if (!(params.z_hit >= 0.0 && params.z_rand >= 0.0)) {
    throw ConfigError("likelihood field weights must be nonnegative");
  }
  if (!(params.max_distance >= 0.0)) {
    throw ConfigError("likelihood field max distance must be nonnegative");
  }
}

void validate(const AugmentedParams& params) {
  // Both zero is the documented off-switch for recovery injection.
  if (params.alpha_slow == 0.0 && params.alpha_fast == 0.0) return;
  if (!(params.alpha_slow > 0.0 && params.alpha_slow < params.alpha_fast &&
        params.alpha_fast <= 1.0)) {
    throw ConfigError("augmented smoothing needs 0 < alpha_slow < alpha_fast <= 1");
  }
}

void validate(const KldParams& params) {
  if (!(params.epsilon > 0.0)) throw ConfigError("KLD epsilon must be positive");
  if (!(params.delta > 0.0 && params.delta < 1.0)) {
    throw ConfigError("KLD delta must lie in (0, 1)");
  }
  if (!(params.bin_xy > 0.0 && params.bin_theta > 0.0)) {
    throw ConfigError("KLD bin sizes must be positive");
  }
  if (params.n_min < 10 || params.n_max < params.n_min) {
    throw ConfigError("KLD particle bounds need n_min >= 10 and n_max >= n_min");
  }
}

void validate(const AmclParams& params) {
  validate(params.motion);
  validate(params.augmented);
  validate(params.kld);
  if (params.sensor == SensorModelKind::kLikelihoodField) {
    validate(params.field);
  } else {
    validate(params.beam);
  }
  if (params.beam_stride < 1) throw ConfigError("beam stride must be >= 1");
}

Pose2D sample_motion_model_odometry(const Pose2D& pose, const OdometryDelta& delta,
                                    const MotionNoiseParams& noise, RandomStream& rng) {
  validate(noise);
  const double trans2 = delta.trans * delta.trans;
  const double g1 = rng.gaussian();
  const double g2 = rng.gaussian();
  const double g3 = rng.gaussian();
  const double rot1 =
      delta.rot1 - g1 * std::sqrt(noise.a1 * delta.rot1 * delta.rot1 + noise.a2 * trans2);
  const double trans =
      delta.trans -
      g2 * std::sqrt(noise.a3 * trans2 + noise.a4 * (delta.rot1 * delta.rot1 +
                                                     delta.rot2 * delta.rot2));
  const double rot2 =
      delta.rot2 - g3 * std::sqrt(noise.a1 * delta.rot2 * delta.rot2 + noise.a2 * trans2);

  Pose2D out;
  out.x = pose.x + trans * std::cos(pose.theta + rot1);
  out.y = pose.y + trans * std::sin(pose.theta + rot1);
  out.theta = wrap_angle(pose.theta + rot1 + rot2);
  return out;
}

double beam_range_finder_model(const LaserScan& scan, const Pose2D& pose,
                               const OccupancyGrid& map, const BeamNoiseParams& params,
                               int stride) {
  validate(params);
  if (stride < 1) throw ConfigError("beam stride must be >= 1");
  if (params.z_hit > 0.0 && params.sigma_hit <= 0.0) {
    throw ConfigError("beam model needs sigma_hit > 0 when z_hit > 0");
  }
  double log_likelihood = 0.0;
  for (int i = 0; i < scan.size(); i += stride) {
    const double z = scan.ranges[i];
    if (z > scan.z_max) throw DomainError("measured range exceeds z_max");
    if (z < 0.0) throw DomainError("measured range is negative");
    const double expected =
        grid_raycast(map, {pose.x, pose.y}, pose.theta + scan.angle(i), scan.z_max);
    log_likelihood += std::log(beam_density(z, expected, scan.z_max, params));
  }
  return log_likelihood;
}

double likelihood_field_range_finder(const LaserScan& scan, const Pose2D& pose,
                                     const DistanceField& field,
                                     const LikelihoodFieldParams& params) {
  validate(params);
  const double c = std::cos(pose.theta);
  const double s = std::sin(pose.theta);
  const double gauss_norm = 1.0 / (params.sigma * std::sqrt(2.0 * kPi));
  double log_likelihood = 0.0;
  for (int i = 0; i < scan.size(); ++i) {
    const double z = scan.ranges[i];
    if (z >= scan.z_max) continue;
    const double a = scan.angle(i);
    const double lx = z * std::cos(a);
    const double ly = z * std::sin(a);
    double dist = field.sample({pose.x + c * lx - s * ly, pose.y + s * lx + c * ly});
    if (!std::isfinite(dist)) dist = params.max_distance;
    const double ratio = dist / params.sigma;
    log_likelihood += std::log(params.z_hit * gauss_norm * std::exp(-0.5 * ratio * ratio) +
                               params.z_rand / scan.z_max);
  }
  return log_likelihood;
}

int kld_required_samples(int k, const KldParams& kld) {
  validate(kld);
  if (k <= 1) return kld.n_min;
  const double bins = static_cast<double>(k - 1);
  const double a = 2.0 / (9.0 * bins);
  const double base = 1.0 - a + std::sqrt(a) * normal_quantile(1.0 - kld.delta);
  const double n = bins / (2.0 * kld.epsilon) * base * base * base;
  const double clamped =
      std::min(static_cast<double>(kld.n_max),
               std::max(static_cast<double>(kld.n_min), std::ceil(n)));
  return static_cast<int>(clamped);
}

PoseEstimate estimate_pose(const ParticleSet& set) {
  if (set.particles.empty()) throw DomainError("empty particle set");
  double total = 0.0;
  double mx = 0.0;
  double my = 0.0;
  double ms = 0.0;
  double mc = 0.0;
  for (const Particle& p : set.particles) {
    if (!std::isfinite(p.weight) || p.weight < 0.0) {
      throw DomainError("particle weights must be finite and nonnegative");
    }
    total += p.weight;
    mx += p.weight * p.pose.x;
    my += p.weight * p.pose.y;
    ms += p.weight * std::sin(p.pose.theta);
    mc += p.weight * std::cos(p.pose.theta);
  }
  if (total <= 0.0) throw DomainError("all particle weights are zero");

  PoseEstimate out;
  out.pose = {mx / total, my / total, std::atan2(ms, mc)};
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const Particle& p : set.particles) {
    const Eigen::Vector3d r{p.pose.x - out.pose.x, p.pose.y - out.pose.y,
                            wrap_angle(p.pose.theta - out.pose.theta)};
    cov += p.weight * r * r.transpose();
  }
  out.covariance = cov / total;
  return out;
}

ParticleSet augmented_mcl_step(const ParticleSet& set, const OdometryDelta& delta,
                               const LaserScan& scan, const OccupancyGrid& map,
                               const DistanceField& field, const AmclParams& params,
                               RandomStream& rng) {
  validate(params);
  if (set.particles.empty()) throw DomainError("empty particle set");

  const size_t n = set.particles.size();
  std::vector<Particle> moved(n);
  for (size_t i = 0; i < n; ++i) {
    moved[i].pose =
        sample_motion_model_odometry(set.particles[i].pose, delta, params.motion, rng);
  }

  int used_beams = 0;
  if (params.sensor == SensorModelKind::kBeam) {
    for (int i = 0; i < scan.size(); i += params.beam_stride) ++used_beams;
  } else {
    for (int i = 0; i < scan.size(); ++i) {
      if (scan.ranges[i] < scan.z_max) ++used_beams;
    }
  }

  // Weights live on a per-beam scale (geometric mean of beam densities):
  // representable for any beam count, and the w_fast / w_slow ratio stays
  // comparable from scan to scan.
  double sum = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double ll =
        params.sensor == SensorModelKind::kBeam
            ? beam_range_finder_model(scan, moved[i].pose, map, params.beam,
                                      params.beam_stride)
            : likelihood_field_range_finder(scan, moved[i].pose, field, params.field);
    moved[i].weight = std::exp(ll / std::max(1, used_beams));
    sum += moved[i].weight;
  }
  const double w_avg = sum / static_cast<double>(n);

  ParticleSet out;
  out.w_slow = set.w_slow + params.augmented.alpha_slow * (w_avg - set.w_slow);
  out.w_fast = set.w_fast + params.augmented.alpha_fast * (w_avg - set.w_fast);
  const double inject =
      out.w_slow > 0.0 ? std::max(0.0, 1.0 - out.w_fast / out.w_slow) : 0.0;

  std::vector<GridIndex> free;
  if (inject > 0.0) {
    free = free_cells(map);
    if (free.empty()) throw ConfigError("map has no free cells to inject into");
  }

  if (sum <= 0.0) {
    // Every pose scored zero; fall back to the motion prior.
    for (Particle& p : moved) p.weight = 1.0;
    sum = static_cast<double>(n);
  }

  // Low-variance resampling in rounds of n systematic draws; each draw may
  // be replaced by an injected free-space pose. Drawing stops as soon as
  // the KLD-required count for the bins seen so far is reached.
  std::unordered_set<std::uint64_t> bins;
  out.particles.reserve(static_cast<size_t>(params.kld.n_min));
  size_t slot = n;
  size_t index = 0;
  double step = 0.0;
  double target = 0.0;
  double cumulative = 0.0;
  while (static_cast<int>(out.particles.size()) < params.kld.n_max) {
    if (slot == n) {
      step = sum / static_cast<double>(n);
      target = rng.uniform() * step;
      cumulative = moved[0].weight;
      index = 0;
      slot = 0;
    }
    while (cumulative < target && index + 1 < n) {
      ++index;
      cumulative += moved[index].weight;
    }
    Particle drawn = moved[index];
    if (rng.uniform() < inject) {
      drawn.pose = random_free_pose(map, free, rng);
    }
    out.particles.push_back(drawn);
    bins.insert(kld_bin_key(drawn.pose, params.kld));
    ++slot;
    target += step;
    if (static_cast<int>(out.particles.size()) >=
        kld_required_samples(static_cast<int>(bins.size()), params.kld)) {
      break;
    }
  }

  const double uniform = 1.0 / static_cast<double>(out.particles.size());
  for (Particle& p : out.particles) p.weight = uniform;
  return out;
}

ParticleSet initialize_uniform(const OccupancyGrid& map, int count, RandomStream& rng) {
  if (count < 1) throw DomainError("particle count must be positive");
  const std::vector<GridIndex> free = free_cells(map);
  if (free.empty()) throw ConfigError("map has no free cells");
  ParticleSet set;
  set.particles.resize(static_cast<size_t>(count));
  const double w = 1.0 / count;
  for (Particle& p : set.particles) {
    p.pose = random_free_pose(map, free, rng);
    p.weight = w;
  }
  return set;
}

ParticleSet initialize_around(const Pose2D& pose, int count, double xy_std,
                              double theta_std, RandomStream& rng) {
  if (count < 1) throw DomainError("particle count must be positive");
  if (!(xy_std >= 0.0 && theta_std >= 0.0)) {
    throw DomainError("spread standard deviations must be nonnegative");
  }
  ParticleSet set;
  set.particles.resize(static_cast<size_t>(count));
  const double w = 1.0 / count;
  for (Particle& p : set.particles) {
    p.pose = {pose.x + xy_std * rng.gaussian(), pose.y + xy_std * rng.gaussian(),
              wrap_angle(pose.theta + theta_std * rng.gaussian())};
    p.weight = w;
  }
  return set;
}

AmclFilter::AmclFilter(OccupancyGrid map, const AmclParams& params, std::uint64_t seed)
    : map_(std::move(map)), params_(params), rng_(seed) {
  validate(params_);
  const TriStateMap tri = to_tri_state(map_);
  std::vector<std::uint8_t> mask(tri.cells.size(), 0);
  for (size_t i = 0; i < tri.cells.size(); ++i) {
    mask[i] = tri.cells[i] == CellState::Occupied ? 1 : 0;
  }
  field_ = distance_transform(map_.width(), map_.height(), map_.resolution(),
                              map_.origin(), mask);
}

void AmclFilter::seed_uniform(int count) {
  set_ = initialize_uniform(map_, count > 0 ? count : params_.kld.n_max, rng_);
  has_odometry_ = false;
}

void AmclFilter::seed_around(const Pose2D& pose, double xy_std, double theta_std,
                             int count) {
  set_ = initialize_around(pose, count > 0 ? count : params_.kld.n_min, xy_std,
                           theta_std, rng_);
  has_odometry_ = false;
}

PoseEstimate AmclFilter::update(const Pose2D& odometry, const LaserScan& scan) {
  if (set_.particles.empty()) throw ConfigError("filter has not been seeded");
  OdometryDelta delta;
  if (has_odometry_) delta = odometry_delta(last_odometry_, odometry);
  last_odometry_ = odometry;
  has_odometry_ = true;
  set_ = augmented_mcl_step(set_, delta, scan, map_, field_, params_, rng_);
  return estimate_pose(set_);
}

}  // namespace navcore
