#include "navcore/world.hpp"

#include <cmath>

#include "doctest.h"
#include "navcore/errors.hpp"
#include "navcore/random.hpp"
#include "support/oracles.hpp"

using namespace navcore;

TEST_CASE("wrap_angle maps onto (-pi, pi]") {
  CHECK(wrap_angle(0.0) == 0.0);
  CHECK(wrap_angle(kPi) == doctest::Approx(kPi));
  CHECK(wrap_angle(-kPi) == doctest::Approx(kPi));  // seam belongs to +pi
  CHECK(wrap_angle(3.0 * kPi) == doctest::Approx(kPi));
  CHECK(wrap_angle(-0.5) == doctest::Approx(-0.5));
  CHECK(wrap_angle(7.0) == doctest::Approx(7.0 - 2.0 * kPi));
  for (double a = -20.0; a < 20.0; a += 0.137) {
    const double w = wrap_angle(a);
    CHECK(w > -kPi);
    CHECK(w <= kPi);
    CHECK(std::cos(w) == doctest::Approx(std::cos(a)));
    CHECK(std::sin(w) == doctest::Approx(std::sin(a)));
  }
}

TEST_CASE("pose composition round-trips through inverse") {
  const Pose2D a{1.0, 2.0, 0.7};
  const Pose2D b{-0.5, 0.3, -1.2};
  const Pose2D ab = compose(a, b);
  const Pose2D back = compose(inverse(a), ab);
  CHECK(back.x == doctest::Approx(b.x));
  CHECK(back.y == doctest::Approx(b.y));
  CHECK(back.theta == doctest::Approx(b.theta));

  const Pose2D rel = relative_pose(a, ab);
  CHECK(rel.x == doctest::Approx(b.x));
  CHECK(rel.y == doctest::Approx(b.y));
  CHECK(rel.theta == doctest::Approx(b.theta));
}

TEST_CASE("step_vehicle drives straight when steering is zero") {
  VehicleParams params;
  VehicleState state;
  state.speed = 1.0;
  const VehicleState next = step_vehicle(state, {1.0, 0.0}, 1.0, params);
  CHECK(next.pose.x == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(next.pose.y == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(next.pose.theta == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("step_vehicle holds pose at zero speed") {
  VehicleParams params;
  VehicleState state;
  state.pose = {0.4, -0.2, 1.1};
  const VehicleState next = step_vehicle(state, {0.0, 0.2}, 5.0, params);
  CHECK(next.pose.x == state.pose.x);
  CHECK(next.pose.y == state.pose.y);
  CHECK(next.pose.theta == state.pose.theta);
}

TEST_CASE("step_vehicle traces a unit-radius quarter circle") {
  VehicleParams params;
  params.wheelbase = 0.3;
  params.max_steer = 0.5;
  VehicleState state;
  state.speed = 1.0;
  const double phi = std::atan(0.3);  // turn radius wheelbase/tan(phi) = 1
  const VehicleState next = step_vehicle(state, {1.0, phi}, kPi / 2.0, params);
  CHECK(std::abs(next.pose.x - 1.0) < 1e-9);
  CHECK(std::abs(next.pose.y - 1.0) < 1e-9);
  CHECK(std::abs(next.pose.theta - kPi / 2.0) < 1e-9);
}

TEST_CASE("step_vehicle matches closed-form arcs over random inputs") {
  VehicleParams params;
  params.max_speed = 2.0;
  params.max_accel = 100.0;  // large so the commanded speed always applies
  RandomStream rng(42);
  for (int i = 0; i < 2000; ++i) {
    VehicleState state;
    state.pose = {rng.uniform(-5.0, 5.0), rng.uniform(-5.0, 5.0), rng.uniform(-3.1, 3.1)};
    const DriveCommand cmd{rng.uniform(-2.0, 2.0), rng.uniform(-0.6, 0.6)};
    state.speed = cmd.v;  // already at speed, so only the arc geometry is in play
    const double dt = rng.uniform(0.001, 0.5);

    const VehicleState next = step_vehicle(state, cmd, dt, params);
    const double omega = cmd.v * std::tan(cmd.phi) / params.wheelbase;
    const Pose2D want = oracles::arc_pose_closed_form(state.pose, cmd.v, omega, dt);
    CHECK(std::abs(next.pose.x - want.x) < 1e-9);
    CHECK(std::abs(next.pose.y - want.y) < 1e-9);
    CHECK(std::abs(wrap_angle(next.pose.theta - want.theta)) < 1e-9);
  }
}

TEST_CASE("step_vehicle clamps speed, steering, and acceleration") {
  VehicleParams params;
  params.max_speed = 1.0;
  params.max_accel = 2.0;
  params.max_steer = 0.6;
  VehicleState state;

  SUBCASE("acceleration limit shapes the ramp from rest") {
    const VehicleState next = step_vehicle(state, {1.0, 0.0}, 0.1, params);
    CHECK(next.speed == doctest::Approx(0.2));
  }
  SUBCASE("speed command clamps to max_speed") {
    state.speed = 1.0;
    const VehicleState next = step_vehicle(state, {50.0, 0.0}, 0.1, params);
    CHECK(next.speed == doctest::Approx(1.0));
  }
  SUBCASE("steering clamps to max_steer") {
    const VehicleState next = step_vehicle(state, {0.5, 2.0}, 0.1, params);
    CHECK(next.steer == doctest::Approx(0.6));
  }
  SUBCASE("deceleration is limited as well") {
    state.speed = 1.0;
    const VehicleState next = step_vehicle(state, {-1.0, 0.0}, 0.1, params);
    CHECK(next.speed == doctest::Approx(0.8));
  }
}

TEST_CASE("step_vehicle rejects non-finite input") {
  VehicleParams params;
  VehicleState state;
  CHECK_THROWS_AS(step_vehicle(state, {std::nan(""), 0.0}, 0.1, params), DomainError);
  CHECK_THROWS_AS(step_vehicle(state, {1.0, INFINITY}, 0.1, params), DomainError);
  CHECK_THROWS_AS(step_vehicle(state, {1.0, 0.0}, 0.0, params), DomainError);
  CHECK_THROWS_AS(step_vehicle(state, {1.0, 0.0}, -0.1, params), DomainError);
}

TEST_CASE("heading stays normalized across many turning steps") {
  VehicleParams params;
  VehicleState state;
  state.speed = 1.0;
  for (int i = 0; i < 5000; ++i) {
    state = step_vehicle(state, {1.0, 0.4}, 0.05, params);
    CHECK(state.pose.theta > -kPi);
    CHECK(state.pose.theta <= kPi);
  }
}

TEST_CASE("polygon primitives agree with hand geometry") {
  const Polygon square = oracles::rect(0.0, 0.0, 2.0, 2.0);
  CHECK(polygon_is_ccw(square));
  CHECK(polygon_area(square) == doctest::Approx(4.0));

  CHECK(polygon_contains(square, {1.0, 1.0}));
  CHECK(polygon_contains(square, {0.0, 0.0}));  // boundary counts as inside
  CHECK(polygon_contains(square, {2.0, 1.0}));
  CHECK(!polygon_contains(square, {2.1, 1.0}));
  CHECK(!polygon_contains(square, {-0.001, 1.0}));

  CHECK(polygon_signed_distance(square, {1.0, 1.0}) == doctest::Approx(-1.0));
  CHECK(polygon_signed_distance(square, {3.0, 1.0}) == doctest::Approx(1.0));
  CHECK(polygon_signed_distance(square, {3.0, 3.0}) == doctest::Approx(std::sqrt(2.0)));
  CHECK(polygon_signed_distance(square, {1.0, -0.5}) == doctest::Approx(0.5));

  Polygon clockwise = square;
  std::reverse(clockwise.vertices.begin(), clockwise.vertices.end());
  CHECK(!polygon_is_ccw(clockwise));
}

TEST_CASE("world validation rejects malformed input") {
  WorldModel world = oracles::empty_world();
  validate(world);

  SUBCASE("inverted bounds") {
    world.bounds = {5.0, -5.0, -5.0, 5.0};
    CHECK_THROWS_AS(validate(world), ConfigError);
  }
  SUBCASE("clockwise obstacle") {
    Polygon p = oracles::rect(0.0, 0.0, 1.0, 1.0);
    std::reverse(p.vertices.begin(), p.vertices.end());
    world.obstacles.push_back(p);
    CHECK_THROWS_AS(validate(world), ConfigError);
  }
  SUBCASE("degenerate obstacle") {
    world.obstacles.push_back({{{0.0, 0.0}, {1.0, 0.0}}});
    CHECK_THROWS_AS(validate(world), ConfigError);
  }
  SUBCASE("vertex outside bounds") {
    world.obstacles.push_back(oracles::rect(4.0, 4.0, 6.0, 6.0));
    CHECK_THROWS_AS(validate(world), ConfigError);
  }
}

TEST_CASE("clearance accounts for bounds walls and obstacles") {
  WorldModel world = oracles::empty_world();
  world.obstacles.push_back(oracles::rect(1.0, -1.0, 2.0, 1.0));

  CHECK(world_clearance(world, {0.0, 0.0}, 0.0) == doctest::Approx(1.0));
  CHECK(world_clearance(world, {0.0, 0.0}, 0.25) == doctest::Approx(0.75));
  CHECK(world_clearance(world, {-4.9, 0.0}, 0.0) == doctest::Approx(0.1));
  CHECK(world_clearance(world, {1.5, 0.0}, 0.0) < 0.0);  // center embedded

  CHECK(is_collision_free(world, {0.0, 0.0}, 0.5));
  CHECK(!is_collision_free(world, {0.6, 0.0}, 0.5));
  CHECK(!is_collision_free(world, {-4.8, 0.0}, 0.5));  // overlaps the wall
}
