#include "navcore/teb.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"
#include "navcore/costmap.hpp"
#include "navcore/errors.hpp"
#include "navcore/random.hpp"

using namespace navcore;

namespace {

TebTrajectory straight_band(int n, double spacing, double tau) {
  TebTrajectory teb;
  for (int i = 0; i < n; ++i) teb.poses.push_back({spacing * i, 0.0, 0.0});
  teb.time_diffs.assign(n - 1, tau);
  return teb;
}

TebTrajectory random_band(RandomStream& rng) {
  const int n = 4 + static_cast<int>(rng.uniform_int(0, 4));
  TebTrajectory teb;
  for (int i = 0; i < n; ++i) {
    teb.poses.push_back(
        {rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5), rng.uniform(-kPi, kPi)});
  }
  for (int i = 0; i + 1 < n; ++i) teb.time_diffs.push_back(rng.uniform(0.05, 0.4));
  return teb;
}

void nudge(TebTrajectory& teb, int var, double step) {
  const int pose_vars = 3 * (teb.size() - 2);
  if (var < pose_vars) {
    Pose2D& pose = teb.poses[1 + var / 3];
    if (var % 3 == 0) pose.x += step;
    if (var % 3 == 1) pose.y += step;
    if (var % 3 == 2) pose.theta += step;
  } else {
    teb.time_diffs[var - pose_vars] += step;
  }
}

double fd_max_rel_error(const TebTrajectory& teb, const std::vector<Vec2>& obstacles,
                        const TebParams& params) {
  const TebObjective analytic = objective(teb, obstacles, params);
  const int vars = 3 * (teb.size() - 2) + teb.size() - 1;
  const double h = 1e-6;
  Eigen::VectorXd fd(vars);
  for (int v = 0; v < vars; ++v) {
    TebTrajectory hi = teb, lo = teb;
    nudge(hi, v, h);
    nudge(lo, v, -h);
    fd(v) =
        (objective(hi, obstacles, params).value - objective(lo, obstacles, params).value) /
        (2.0 * h);
  }
  return (analytic.gradient - fd).lpNorm<Eigen::Infinity>() /
         std::max(1.0, fd.lpNorm<Eigen::Infinity>());
}

double min_clearance(const TebTrajectory& teb, const std::vector<Vec2>& obstacles) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& pose : teb.poses) {
    for (const auto& o : obstacles) {
      best = std::min(best, std::hypot(pose.x - o.x, pose.y - o.y));
    }
  }
  return best;
}

bool phases_monotone(const TebTrace& trace) {
  for (const auto& phase : trace.phases) {
    for (size_t i = 1; i < phase.size(); ++i) {
      if (phase[i] > phase[i - 1] + 1e-12) return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("initialization resamples the global path") {
  TebParams params;

  SUBCASE("a meter-long segment splits evenly") {
    GlobalPath path;
    path.waypoints = {{0.0, 0.0, 0.0}, {1.0, 0.0, 0.0}};
    const TebTrajectory teb = init_from_global(path, params);
    REQUIRE(teb.size() == 5);
    REQUIRE(teb.time_diffs.size() == 4);
    for (int i = 0; i < 5; ++i) {
      CHECK(teb.poses[i].x == doctest::Approx(0.25 * i).epsilon(1e-12));
      CHECK(teb.poses[i].y == doctest::Approx(0.0).epsilon(1e-12));
      CHECK(teb.poses[i].theta == doctest::Approx(0.0).epsilon(1e-12));
    }
    for (double dt : teb.time_diffs) {
      CHECK(dt == doctest::Approx(0.25 / 0.8).epsilon(1e-12));
    }
  }

  SUBCASE("a single waypoint duplicates into a floor-time band") {
    GlobalPath path;
    path.waypoints = {{0.3, -0.2, 0.7}};
    const TebTrajectory teb = init_from_global(path, params);
    REQUIRE(teb.size() == 2);
    CHECK(teb.poses[0].x == 0.3);
    CHECK(teb.poses[1].x == 0.3);
    CHECK(teb.poses[0].theta == 0.7);
    CHECK(teb.poses[1].theta == 0.7);
    CHECK(teb.time_diffs[0] == kTebMinTimeDiff);
  }

  SUBCASE("heading flips exactly at an L corner") {
    GlobalPath path;
    path.waypoints = {{0.0, 0.0, 0.0}, {1.0, 0.0, 0.0}, {1.0, 1.0, 0.9}};
    const TebTrajectory teb = init_from_global(path, params);
    REQUIRE(teb.size() == 9);
    CHECK(teb.poses[4].x == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(teb.poses[4].y == doctest::Approx(0.0).epsilon(1e-12));
    for (int i = 0; i < 4; ++i) CHECK(teb.poses[i].theta == doctest::Approx(0.0));
    for (int i = 4; i < 8; ++i) CHECK(teb.poses[i].theta == doctest::Approx(kPi / 2));
    CHECK(teb.poses[8].theta == doctest::Approx(0.9));
  }
}

TEST_CASE("feasible straight bands cost only time") {
  TebParams params;
  const TebTrajectory teb = straight_band(5, 0.25, 0.5);
  const TebObjective obj = objective(teb, {}, params);
  CHECK(obj.value == doctest::Approx(params.weights.time * 2.0).epsilon(1e-12));
  REQUIRE(obj.gradient.size() == 13);
  // Every non-time penalty sits at zero, so pose coordinates carry no pull.
  CHECK(obj.gradient.head(9).cwiseAbs().maxCoeff() == 0.0);
  for (int i = 9; i < 13; ++i) {
    CHECK(obj.gradient(i) == doctest::Approx(params.weights.time).epsilon(1e-12));
  }
}

TEST_CASE("the obstacle hinge evaluates by hand") {
  TebParams params;
  params.weights = {};
  params.weights.time = 0.0;
  params.weights.velocity = 0.0;
  params.weights.acceleration = 0.0;
  params.weights.kinematics = 0.0;
  params.weights.turning_radius = 0.0;
  params.weights.obstacle = 50.0;
  params.min_obstacle_dist = 0.3;

  TebTrajectory teb;
  teb.poses = {{0.0, 0.0, 0.0}, {1.0, 0.0, 0.0}};
  teb.time_diffs = {1.0};

  const TebObjective obj = objective(teb, {{0.0, 0.15}}, params);
  CHECK(obj.value == doctest::Approx(50.0 * 0.15 * 0.15).epsilon(1e-12));
  REQUIRE(obj.gradient.size() == 1);
  CHECK(obj.gradient(0) == 0.0);
}

TEST_CASE("the analytic gradient matches central differences") {
  TebParams params;
  params.max_vel = 0.5;
  params.max_accel = 0.5;
  params.min_turn_radius = 0.4;
  params.min_obstacle_dist = 0.5;

  for (int trial = 0; trial < 20; ++trial) {
    RandomStream rng(900 + trial);
    const TebTrajectory teb = random_band(rng);
    std::vector<Vec2> obstacles;
    for (int o = 0; o < 3; ++o) {
      obstacles.push_back({rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5)});
    }
    CAPTURE(trial);
    CHECK(fd_max_rel_error(teb, obstacles, params) < 1e-4);
  }
}

TEST_CASE("objective is invariant under rigid transforms") {
  TebParams params;
  params.max_vel = 0.5;
  params.min_turn_radius = 0.4;
  params.min_obstacle_dist = 0.5;

  for (int trial = 0; trial < 5; ++trial) {
    RandomStream rng(1300 + trial);
    const TebTrajectory teb = random_band(rng);
    std::vector<Vec2> obstacles;
    for (int o = 0; o < 3; ++o) {
      obstacles.push_back({rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5)});
    }
    const double alpha = rng.uniform(-kPi, kPi);
    const double tx = rng.uniform(-3.0, 3.0), ty = rng.uniform(-3.0, 3.0);
    const double c = std::cos(alpha), s = std::sin(alpha);

    TebTrajectory moved = teb;
    for (auto& pose : moved.poses) {
      const double x = c * pose.x - s * pose.y + tx;
      const double y = s * pose.x + c * pose.y + ty;
      pose = {x, y, wrap_angle(pose.theta + alpha)};
    }
    std::vector<Vec2> moved_obstacles;
    for (const auto& o : obstacles) {
      moved_obstacles.push_back({c * o.x - s * o.y + tx, s * o.x + c * o.y + ty});
    }

    const double before = objective(teb, obstacles, params).value;
    const double after = objective(moved, moved_obstacles, params).value;
    CAPTURE(trial);
    CHECK(after == doctest::Approx(before).epsilon(1e-9));
  }
}

TEST_CASE("optimization shortens travel time on a feasible straight band") {
  TebParams params;
  GlobalPath path;
  path.waypoints = {{0.0, 0.0, 0.0}, {2.0, 0.0, 0.0}};
  const TebTrajectory init = init_from_global(path, params);
  CHECK(init.total_time() == doctest::Approx(2.5).epsilon(1e-9));

  TebTrace trace;
  const TebTrajectory out = optimize(init, {}, params, 200, &trace);
  REQUIRE(out.size() == init.size());
  for (int i = 0; i < out.size(); ++i) {
    CHECK(std::abs(out.poses[i].x - init.poses[i].x) < 1e-6);
    CHECK(std::abs(out.poses[i].y - init.poses[i].y) < 1e-6);
    CHECK(std::abs(out.poses[i].theta - init.poses[i].theta) < 1e-6);
  }
  // The time optimum sits at length / max_vel; the velocity hinge leaves a
  // sliver of overspeed so the total lands just under it.
  CHECK(out.total_time() < init.total_time());
  CHECK(std::abs(out.total_time() - 2.0) < 0.2);
  for (double dt : out.time_diffs) CHECK(dt > kTebMinTimeDiff);
  CHECK(phases_monotone(trace));
  CHECK(trace.phases.size() == 1);
}

TEST_CASE("optimization pushes the band off an obstacle") {
  TebParams params;
  params.weights.kinematics = 100.0;
  GlobalPath path;
  path.waypoints = {{0.0, 0.0, 0.0}, {2.0, 0.0, 0.0}};
  const TebTrajectory init = init_from_global(path, params);
  const std::vector<Vec2> obstacles = {{1.0, 0.05}};

  TebTrace trace;
  const TebTrajectory out = optimize(init, obstacles, params, 300, &trace);
  CHECK(min_clearance(out, obstacles) > min_clearance(init, obstacles));
  CHECK(phases_monotone(trace));
  CHECK(out.poses.front().x == init.poses.front().x);
  CHECK(out.poses.front().y == init.poses.front().y);
  CHECK(out.poses.front().theta == init.poses.front().theta);
  CHECK(out.poses.back().x == init.poses.back().x);
  CHECK(out.poses.back().y == init.poses.back().y);
  CHECK(out.poses.back().theta == init.poses.back().theta);
  for (double dt : out.time_diffs) CHECK(dt > kTebMinTimeDiff);
}

TEST_CASE("band resizing keeps spacing near the reference") {
  TebParams params;
  params.weights.kinematics = 0.0;
  params.weights.acceleration = 0.0;

  TebTrajectory teb;
  teb.poses = {{0.0, 0.0, 0.0}, {0.8, 0.0, 0.0}, {0.85, 0.0, 0.0}, {1.65, 0.0, 0.0}};
  teb.time_diffs = {1.0, 0.011, 1.0};

  TebTrace trace;
  const TebTrajectory out = optimize(teb, {}, params, 20, &trace);
  CHECK(trace.phases.size() >= 2);
  CHECK(phases_monotone(trace));
  for (int i = 0; i + 1 < out.size(); ++i) {
    const double spacing =
        std::hypot(out.poses[i + 1].x - out.poses[i].x, out.poses[i + 1].y - out.poses[i].y);
    CHECK(spacing < 2.0 * params.ref_resolution + 1e-6);
    CHECK(spacing > 0.5 * params.ref_resolution - 1e-6);
  }
  CHECK(out.poses.front().x == teb.poses.front().x);
  CHECK(out.poses.back().x == teb.poses.back().x);
}

TEST_CASE("zero iterations return the input unchanged") {
  TebParams params;
  const TebTrajectory teb = straight_band(4, 0.3, 0.25);
  const TebTrajectory out = optimize(teb, {{0.5, 0.1}}, params, 0);
  REQUIRE(out.size() == teb.size());
  for (int i = 0; i < out.size(); ++i) {
    CHECK(out.poses[i].x == teb.poses[i].x);
    CHECK(out.poses[i].y == teb.poses[i].y);
    CHECK(out.poses[i].theta == teb.poses[i].theta);
  }
  for (size_t i = 0; i < out.time_diffs.size(); ++i) {
    CHECK(out.time_diffs[i] == teb.time_diffs[i]);
  }
}

TEST_CASE("the first segment yields the drive command") {
  SUBCASE("forward motion") {
    TebTrajectory teb;
    teb.poses = {{0.0, 0.0, 0.0}, {0.5, 0.0, 0.0}};
    teb.time_diffs = {1.0};
    const Twist2D cmd = command_from_teb(teb);
    CHECK(cmd.v == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(cmd.omega == 0.0);
  }
  SUBCASE("pure rotation") {
    TebTrajectory teb;
    teb.poses = {{0.0, 0.0, 0.0}, {0.0, 0.0, 0.3}};
    teb.time_diffs = {0.5};
    const Twist2D cmd = command_from_teb(teb);
    CHECK(cmd.v == 0.0);
    CHECK(cmd.omega == doctest::Approx(0.6).epsilon(1e-12));
  }
  SUBCASE("a segment behind the heading reverses") {
    TebTrajectory teb;
    teb.poses = {{0.0, 0.0, 0.0}, {-0.5, 0.0, 0.0}};
    teb.time_diffs = {1.0};
    CHECK(command_from_teb(teb).v == doctest::Approx(-0.5).epsilon(1e-12));
  }
}

TEST_CASE("malformed trajectories are rejected") {
  TebParams params;
  TebTrajectory teb = straight_band(3, 0.25, 0.5);

  SUBCASE("non-finite pose") {
    teb.poses[1].x = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(objective(teb, {}, params), DomainError);
    CHECK_THROWS_AS(optimize(teb, {}, params, 5), DomainError);
  }
  SUBCASE("interval below the floor") {
    teb.time_diffs[0] = 0.005;
    CHECK_THROWS_AS(objective(teb, {}, params), DomainError);
  }
  SUBCASE("interval count mismatch") {
    teb.time_diffs.push_back(0.5);
    CHECK_THROWS_AS(objective(teb, {}, params), DomainError);
  }
  SUBCASE("negative iteration budget") {
    CHECK_THROWS_AS(optimize(teb, {}, params, -1), DomainError);
  }
}

TEST_CASE("lethal cells near the band become obstacle points") {
  OccupancyGrid grid(40, 40, 0.1, {0.0, 0.0, 0.0});
  for (int i = 0; i < 5; ++i) grid.update({20, 30}, 4.0);
  for (int row = 0; row < 40; ++row) {
    for (int col = 0; col < 40; ++col) {
      if (row == 20 && col == 30) continue;
      if (std::abs(row - 20) <= 3 && std::abs(col - 30) <= 3) continue;
      grid.update({row, col}, -4.0);
    }
  }
  const Costmap map = build_costmap(grid, {});

  const Vec2 lethal_center = grid.cell_center({20, 30});
  const std::vector<Pose2D> band = {{1.0, 2.0, 0.0}, {2.5, 2.0, 0.0}};

  const std::vector<Vec2> near = lethal_points_near(map, band, 3.0);
  REQUIRE(near.size() == 1);
  CHECK(near[0].x == doctest::Approx(lethal_center.x).epsilon(1e-12));
  CHECK(near[0].y == doctest::Approx(lethal_center.y).epsilon(1e-12));

  CHECK(lethal_points_near(map, band, 0.2).empty());
  CHECK(lethal_points_near(map, {}, 3.0).empty());
}
