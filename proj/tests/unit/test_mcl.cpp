#include "navcore/mcl.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "navcore/errors.hpp"
#include "navcore/grid.hpp"
#include "navcore/lidar.hpp"
#include "navcore/random.hpp"
#include "navcore/slam.hpp"
#include "navcore/world.hpp"
#include "support/oracles.hpp"

using namespace navcore;

namespace {

LaserScan make_scan(std::vector<double> ranges, double z_max,
                    double angle_min = 0.0, double increment = 0.0) {
  LaserScan scan;
  scan.angle_min = angle_min;
  scan.angle_increment = increment;
  scan.z_max = z_max;
  scan.ranges = std::move(ranges);
  return scan;
}

// 8x8 m map with a single saturated wall column at x in [2.0, 2.1).
OccupancyGrid wall_map() {
  OccupancyGrid grid(80, 80, 0.1, {0.0, 0.0, 0.0});
  for (int row = 0; row < grid.height(); ++row) {
    grid.update({row, 20}, 8.0);
  }
  return grid;
}

double truncated_normal_peak(double expected, double sigma, double z_max) {
  const double root2 = std::sqrt(2.0);
  const double mass = 0.5 * (std::erf((z_max - expected) / (sigma * root2)) -
                             std::erf(-expected / (sigma * root2)));
  return 1.0 / (sigma * std::sqrt(2.0 * kPi)) / mass;
}

bool same_pose(const Pose2D& a, const Pose2D& b) {
  return a.x == b.x && a.y == b.y && a.theta == b.theta;
}

}  // namespace

TEST_CASE("sample_motion_model_odometry composes the decomposition onto the pose") {
  RandomStream rng(11);
  SUBCASE("zero noise reproduces the exact composition") {
    const Pose2D out = sample_motion_model_odometry({0, 0, 0}, {kPi / 2, 1.0, 0.0},
                                                    MotionNoiseParams{0, 0, 0, 0}, rng);
    CHECK(out.x == doctest::Approx(0.0));
    CHECK(out.y == doctest::Approx(1.0));
    CHECK(out.theta == doctest::Approx(kPi / 2));
  }
  SUBCASE("zero delta with zero noise leaves the pose untouched") {
    const Pose2D pose{0.37, -1.02, 2.4};
    const Pose2D out =
        sample_motion_model_odometry(pose, {}, MotionNoiseParams{0, 0, 0, 0}, rng);
    CHECK(out.x == pose.x);
    CHECK(out.y == pose.y);
    CHECK(out.theta == pose.theta);
  }
  SUBCASE("translation noise spreads with the configured variance") {
    MotionNoiseParams noise{0.0, 0.0, 0.01, 0.0};
    const int count = 10000;
    double sum = 0.0;
    double sum2 = 0.0;
    for (int i = 0; i < count; ++i) {
      const Pose2D out =
          sample_motion_model_odometry({0, 0, 0}, {0.0, 1.0, 0.0}, noise, rng);
      sum += out.x;
      sum2 += out.x * out.x;
    }
    const double mean = sum / count;
    const double std_dev = std::sqrt(sum2 / count - mean * mean);
    CHECK(std_dev == doctest::Approx(0.1).epsilon(0.10));
  }
}

TEST_CASE("beam_range_finder_model examples") {
  const OccupancyGrid map = wall_map();
  const Pose2D pose{0.5, 0.5, 0.0};  // beam 0 raycasts to the wall at range 1.5

  SUBCASE("measured equals expected under a pure Gaussian component") {
    BeamNoiseParams params;
    params.z_hit = 1.0;
    params.sigma_hit = 0.2;
    const double ll =
        beam_range_finder_model(make_scan({1.5}, 8.0), pose, map, params, 1);
    CHECK(ll == doctest::Approx(std::log(truncated_normal_peak(1.5, 0.2, 8.0))));
  }
  SUBCASE("pure clutter scores 1/z_max per beam") {
    BeamNoiseParams params;
    params.z_hit = 0.0;
    params.z_rand = 1.0;
    const double ll =
        beam_range_finder_model(make_scan({1.0, 2.3}, 8.0), pose, map, params, 1);
    CHECK(ll == doctest::Approx(2.0 * std::log(1.0 / 8.0)));
  }
  SUBCASE("max-range failures occupy the top eighth of the range span") {
    BeamNoiseParams params;
    params.z_hit = 0.0;
    params.z_max_w = 1.0;
    const double in_band =
        beam_range_finder_model(make_scan({7.0}, 8.0), pose, map, params, 1);
    CHECK(in_band == doctest::Approx(std::log(8.0 / 8.0)));
    const double below =
        beam_range_finder_model(make_scan({6.9}, 8.0), pose, map, params, 1);
    CHECK(std::isinf(below));
  }
  SUBCASE("per-beam density integrates to one") {
    RandomStream rng(29);
    for (int draw = 0; draw < 5; ++draw) {
      BeamNoiseParams params;
      params.z_hit = rng.uniform(0.1, 1.0);
      params.z_short = rng.uniform(0.0, 0.5);
      params.z_max_w = rng.uniform(0.0, 0.3);
      params.z_rand = rng.uniform(0.05, 0.5);
      const double total =
          params.z_hit + params.z_short + params.z_max_w + params.z_rand;
      params.z_hit /= total;
      params.z_short /= total;
      params.z_max_w /= total;
      params.z_rand /= total;
      params.sigma_hit = rng.uniform(0.05, 0.5);
      params.lambda_short = rng.uniform(0.2, 2.0);

      const int steps = 10000;
      const double z_max = 8.0;
      double integral = 0.0;
      for (int i = 0; i <= steps; ++i) {
        const double z = z_max * i / steps;
        const double density = std::exp(
            beam_range_finder_model(make_scan({z}, z_max), pose, map, params, 1));
        integral += (i == 0 || i == steps) ? 0.5 * density : density;
      }
      integral *= z_max / steps;
      CHECK(integral == doctest::Approx(1.0).epsilon(1e-3));
    }
  }
  SUBCASE("a measured range beyond z_max is rejected") {
    BeamNoiseParams params;
    params.z_hit = 1.0;
    params.sigma_hit = 0.2;
    CHECK_THROWS_AS(
        beam_range_finder_model(make_scan({8.5}, 8.0), pose, map, params, 1),
        DomainError);
  }
}

TEST_CASE("likelihood_field_range_finder examples") {
  // Single obstacle cell at (row 20, col 30): center (3.05, 2.05).
  std::vector<std::uint8_t> mask(40 * 40, 0);
  mask[20 * 40 + 30] = 1;
  const DistanceField field = distance_transform(40, 40, 0.1, {0.0, 0.0, 0.0}, mask);

  LikelihoodFieldParams params;
  params.sigma = 0.1;
  params.z_hit = 0.95;
  params.z_rand = 0.05;
  params.max_distance = 0.3;
  const double gauss_norm = 1.0 / (params.sigma * std::sqrt(2.0 * kPi));

  SUBCASE("endpoint on the obstacle cell peaks the density") {
    const Pose2D pose{0.5, 2.05, 0.0};
    const double ll = likelihood_field_range_finder(make_scan({2.55}, 8.0), pose,
                                                    field, params);
    CHECK(ll == doctest::Approx(std::log(params.z_hit * gauss_norm + params.z_rand / 8.0)));
  }
  SUBCASE("an endpoint far from every obstacle approaches the clutter floor") {
    const Pose2D pose{0.5, 0.5, 0.0};
    const double ll =
        likelihood_field_range_finder(make_scan({1.0}, 8.0), pose, field, params);
    CHECK(std::exp(ll) == doctest::Approx(params.z_rand / 8.0).epsilon(0.01));
  }
  SUBCASE("all max-range beams score an empty log-likelihood") {
    const double ll = likelihood_field_range_finder(make_scan({8.0, 8.0, 8.0}, 8.0),
                                                    {0.5, 0.5, 0.0}, field, params);
    CHECK(ll == 0.0);
  }
  SUBCASE("endpoints beyond the field use the configured stand-in distance") {
    const Pose2D pose{3.9, 2.0, 0.0};  // beam leaves the 4x4 m field
    const double ll =
        likelihood_field_range_finder(make_scan({1.0}, 8.0), pose, field, params);
    const double ratio = params.max_distance / params.sigma;
    const double expected = params.z_hit * gauss_norm * std::exp(-0.5 * ratio * ratio) +
                            params.z_rand / 8.0;
    CHECK(ll == doctest::Approx(std::log(expected)));
  }
}

TEST_CASE("kld_required_samples follows the chi-square bin bound") {
  KldParams kld;
  kld.epsilon = 0.05;
  kld.delta = 0.01;
  kld.n_min = 10;
  kld.n_max = 1000000;

  SUBCASE("one bin asks for the floor") {
    CHECK(kld_required_samples(0, kld) == kld.n_min);
    CHECK(kld_required_samples(1, kld) == kld.n_min);
  }
  SUBCASE("two bins match an independent evaluation of the bound") {
    const double z_99 = 2.3263478740408408;  // standard normal quantile at 0.99
    const double a = 2.0 / 9.0;
    const double base = 1.0 - a + std::sqrt(a) * z_99;
    const int expected =
        static_cast<int>(std::ceil(1.0 / (2.0 * kld.epsilon) * base * base * base));
    CHECK(kld_required_samples(2, kld) == expected);
  }
  SUBCASE("the requirement grows with the bin count") {
    int prev = 0;
    for (int k = 2; k <= 150; ++k) {
      const int n = kld_required_samples(k, kld);
      CHECK(n >= prev);
      prev = n;
    }
    CHECK(kld_required_samples(100, kld) > kld_required_samples(50, kld));
  }
  SUBCASE("a looser epsilon never asks for more particles") {
    KldParams loose = kld;
    loose.epsilon = 0.1;
    for (int k = 2; k <= 150; ++k) {
      CHECK(kld_required_samples(k, loose) <= kld_required_samples(k, kld));
    }
  }
  SUBCASE("clamps apply at both ends") {
    KldParams tight = kld;
    tight.n_min = 50;
    tight.n_max = 120;
    CHECK(kld_required_samples(2, tight) == 66);
    CHECK(kld_required_samples(1, tight) == 50);
    CHECK(kld_required_samples(500, tight) == 120);
  }
}

TEST_CASE("estimate_pose examples") {
  SUBCASE("identical particles collapse to their pose with zero covariance") {
    ParticleSet set;
    for (int i = 0; i < 5; ++i) set.particles.push_back({{1.2, -0.7, 0.9}, 0.2});
    const PoseEstimate est = estimate_pose(set);
    CHECK(est.pose.x == doctest::Approx(1.2));
    CHECK(est.pose.y == doctest::Approx(-0.7));
    CHECK(est.pose.theta == doctest::Approx(0.9));
    CHECK(est.covariance.norm() == doctest::Approx(0.0));
  }
  SUBCASE("the angular mean is circular, not arithmetic") {
    ParticleSet set;
    set.particles.push_back({{0, 0, 3.0}, 0.5});
    set.particles.push_back({{0, 0, -3.0}, 0.5});
    const PoseEstimate est = estimate_pose(set);
    CHECK(std::abs(est.pose.theta) == doctest::Approx(kPi));
  }
  SUBCASE("two-point spread gives the population variance") {
    ParticleSet set;
    set.particles.push_back({{0, 0, 0}, 0.5});
    set.particles.push_back({{2, 0, 0}, 0.5});
    const PoseEstimate est = estimate_pose(set);
    CHECK(est.pose.x == doctest::Approx(1.0));
    CHECK(est.covariance(0, 0) == doctest::Approx(1.0));
  }
  SUBCASE("degenerate weights are rejected") {
    ParticleSet set;
    set.particles.push_back({{0, 0, 0}, 0.0});
    CHECK_THROWS_AS(estimate_pose(set), DomainError);
    CHECK_THROWS_AS(estimate_pose(ParticleSet{}), DomainError);
  }
}

TEST_CASE("augmented_mcl_step resampling behavior") {
  // All-max-range scan: every pose scores identically, so resampling is
  // driven purely by the systematic draw mechanics.
  const LaserScan blind = make_scan(std::vector<double>(8, 5.0), 5.0, -kPi, kPi / 4);
  OccupancyGrid map(40, 40, 0.1, {-2.0, -2.0, 0.0});
  for (int row = 10; row < 30; ++row) {
    for (int col = 10; col < 30; ++col) map.update({row, col}, -8.0);
  }
  const DistanceField field =
      distance_transform(40, 40, 0.1, {-2.0, -2.0, 0.0}, std::vector<std::uint8_t>(1600, 0));

  AmclParams params;
  params.motion = {0, 0, 0, 0};
  params.kld.n_min = 10;
  params.kld.n_max = 40;

  ParticleSet set;
  for (int j = 0; j < 10; ++j) {
    set.particles.push_back({{0.3 * j - 1.5, 0.0, 0.0}, 0.1});
  }
  set.w_slow = 1.0;
  set.w_fast = 1.0;

  SUBCASE("equal weights and zero injection draw every particle n/N times") {
    RandomStream rng(5);
    const ParticleSet out =
        augmented_mcl_step(set, {}, blind, map, field, params, rng);
    REQUIRE(out.particles.size() == 40);
    for (const Particle& in : set.particles) {
      const auto count = std::count_if(
          out.particles.begin(), out.particles.end(),
          [&](const Particle& p) { return same_pose(p.pose, in.pose); });
      CHECK(count == 4);
    }
    double total = 0.0;
    for (const Particle& p : out.particles) total += p.weight;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
  }
  SUBCASE("a concentrated cloud stops at the particle floor") {
    ParticleSet tight;
    for (int j = 0; j < 200; ++j) tight.particles.push_back({{0.1, 0.1, 0.0}, 1.0 / 200});
    tight.w_slow = 1.0;
    tight.w_fast = 1.0;
    RandomStream rng(6);
    const ParticleSet out =
        augmented_mcl_step(tight, {}, blind, map, field, params, rng);
    CHECK(static_cast<int>(out.particles.size()) == params.kld.n_min);
  }
  SUBCASE("a sagging short-term average injects free-space poses") {
    ParticleSet sag = set;
    sag.w_slow = 1.0;
    sag.w_fast = 0.5;
    AmclParams slow = params;
    slow.augmented.alpha_slow = 1e-9;
    slow.augmented.alpha_fast = 2e-9;
    RandomStream rng(7);
    const ParticleSet out =
        augmented_mcl_step(sag, {}, blind, map, field, slow, rng);
    int novel = 0;
    for (const Particle& p : out.particles) {
      const bool from_input = std::any_of(
          set.particles.begin(), set.particles.end(),
          [&](const Particle& in) { return same_pose(p.pose, in.pose); });
      if (!from_input) ++novel;
    }
    CHECK(novel >= 8);
    CHECK(novel <= 32);
  }
  SUBCASE("matched averages never inject") {
    RandomStream rng(8);
    const ParticleSet out =
        augmented_mcl_step(set, {}, blind, map, field, params, rng);
    for (const Particle& p : out.particles) {
      CHECK(std::any_of(set.particles.begin(), set.particles.end(),
                        [&](const Particle& in) { return same_pose(p.pose, in.pose); }));
    }
  }
  SUBCASE("injection into a map without free space is a configuration error") {
    OccupancyGrid sealed(10, 10, 0.1, {0.0, 0.0, 0.0});
    ParticleSet sag = set;
    sag.w_slow = 1.0;
    sag.w_fast = 0.5;
    AmclParams slow = params;
    slow.augmented.alpha_slow = 1e-9;
    slow.augmented.alpha_fast = 2e-9;
    RandomStream rng(9);
    CHECK_THROWS_AS(augmented_mcl_step(sag, {}, blind, sealed, field, slow, rng),
                    ConfigError);
  }
  SUBCASE("identical seeds give identical particle sets") {
    RandomStream rng_a(31);
    RandomStream rng_b(31);
    const ParticleSet a = augmented_mcl_step(set, {}, blind, map, field, params, rng_a);
    const ParticleSet b = augmented_mcl_step(set, {}, blind, map, field, params, rng_b);
    REQUIRE(a.particles.size() == b.particles.size());
    for (size_t i = 0; i < a.particles.size(); ++i) {
      CHECK(same_pose(a.particles[i].pose, b.particles[i].pose));
    }
  }
}

TEST_CASE("amcl filter tracks a stationary pose on a scan-built map") {
  WorldModel world;
  world.bounds = {-3.0, -3.0, 3.0, 3.0};
  world.obstacles.push_back(oracles::rect(-1.8, 0.6, -0.9, 1.5));
  world.obstacles.push_back(oracles::rect(0.8, -1.9, 1.7, -0.6));

  LidarConfig cfg;
  cfg.beam_count = 240;
  OccupancyGrid map = grid_for_bounds(world.bounds, 0.05, 0.5);
  const std::vector<Pose2D> sweep = {
      {0.0, 0.0, 0.0}, {1.1, 0.9, 1.2}, {-1.2, -0.8, -2.1}, {0.4, -1.1, 2.8}};
  for (const Pose2D& p : sweep) {
    integrate_scan(map, p, cast_scan(world, p, cfg));
  }

  AmclParams params;
  params.kld.n_min = 60;
  params.kld.n_max = 400;
  AmclFilter filter(std::move(map), params, 404);

  const Pose2D truth{0.35, -0.25, 0.6};
  filter.seed_around(truth, 0.08, 0.04, 200);
  const LaserScan scan = cast_scan(world, truth, cfg);
  PoseEstimate est;
  for (int i = 0; i < 5; ++i) {
    est = filter.update(truth, scan);
  }
  CHECK(std::abs(est.pose.x - truth.x) < 0.1);
  CHECK(std::abs(est.pose.y - truth.y) < 0.1);
  CHECK(std::abs(wrap_angle(est.pose.theta - truth.theta)) < kPi / 36);
  CHECK(static_cast<int>(filter.particles().particles.size()) >= params.kld.n_min);
  CHECK(static_cast<int>(filter.particles().particles.size()) <= params.kld.n_max);
}
