#ifndef NAVCORE_TEB_HPP
#define NAVCORE_TEB_HPP

#include <Eigen/Core>
#include <vector>

#include "navcore/costmap.hpp"
#include "navcore/global_planner.hpp"
#include "navcore/types.hpp"

namespace navcore {

// Floor for every time interval. Intervals at or below 1.05x the floor pick up
// a quadratic barrier in the objective; divisions clamp so they never blow up.
inline constexpr double kTebMinTimeDiff = 0.01;

// Time-parameterized elastic band: n poses joined by n-1 time intervals.
struct TebTrajectory {
  std::vector<Pose2D> poses;
  std::vector<double> time_diffs;

  int size() const { return static_cast<int>(poses.size()); }
  double total_time() const;
};

struct TebWeights {
  double time = 1.0;
  double obstacle = 50.0;
  double velocity = 20.0;
  double acceleration = 10.0;
  double kinematics = 1000.0;
  double turning_radius = 100.0;
};

struct TebParams {
  TebWeights weights;
  double min_obstacle_dist = 0.3;  // m
  double max_vel = 1.0;            // m/s
  double max_accel = 1.0;          // m/s^2
  double min_turn_radius = 0.0;    // m, 0 disables the penalty
  double ref_resolution = 0.25;    // m, target spacing between poses
};

// Throw ConfigError / DomainError if an invariant is violated. Trajectory
// intervals must be >= kTebMinTimeDiff; the degenerate two-pose band sits
// exactly on the floor.
void validate(const TebTrajectory& teb);
void validate(const TebParams& params);

// Value plus its gradient over the free variables: interior poses first
// (x, y, theta per pose, in band order), then every time interval. The first
// and last poses are fixed and carry no gradient entries.
struct TebObjective {
  double value = 0.0;
  Eigen::VectorXd gradient;
};

// Resamples the path polyline to ref_resolution spacing. Each pose takes the
// heading of its outgoing segment; the last takes the goal heading. Intervals
// assume travel at 0.8 * max_vel.
TebTrajectory init_from_global(const GlobalPath& path, const TebParams& params);

TebObjective objective(const TebTrajectory& teb, const std::vector<Vec2>& obstacles,
                       const TebParams& params);

// Objective after each accepted step, one sequence per fixed-dimension phase;
// band resizing ends the phase and seeds the next with the resized value.
struct TebTrace {
  std::vector<std::vector<double>> phases;
};

// Damped least-squares descent accepting only improving steps, with the band
// resized between iterations: segments longer than 2x ref_resolution gain a
// midpoint, segments shorter than half of it lose an interior pose. Endpoints
// never move.
TebTrajectory optimize(const TebTrajectory& teb, const std::vector<Vec2>& obstacles,
                       const TebParams& params, int max_iters, TebTrace* trace = nullptr);

// Velocity command realizing the first segment: signed speed along the first
// pose heading and the wrapped heading rate.
Twist2D command_from_teb(const TebTrajectory& teb);

// Centers of lethal cells within radius of any band pose; the local obstacle
// set handed to the objective.
std::vector<Vec2> lethal_points_near(const Costmap& map, const std::vector<Pose2D>& band,
                                     double radius);

}  // namespace navcore

#endif  // NAVCORE_TEB_HPP
