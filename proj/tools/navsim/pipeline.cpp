#include "navsim/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <string>

#include "navcore/controller.hpp"
#include "navcore/costmap.hpp"
#include "navcore/ekf.hpp"
#include "navcore/errors.hpp"
#include "navcore/global_planner.hpp"
#include "navcore/mcl.hpp"
#include "navcore/random.hpp"
#include "navcore/teb.hpp"

namespace navsim {

using namespace navcore;

namespace {

// Fork tags keep the per-subsystem noise streams independent of each other.
constexpr std::uint64_t kLidarStream = 1;
constexpr std::uint64_t kImuStream = 2;
constexpr std::uint64_t kMclStream = 3;

std::string time_tag(double t) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", t);
  return buf;
}

double pose_distance(const Pose2D& a, const Pose2D& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

// Meters of global path handed to the band; keeps the solve size bounded.
constexpr double kBandHorizon = 3.0;

// Band plus the parameter set it was sampled with; the optimizer must see
// the same resolution or its resize pass undoes the sampling.
struct LocalPlan {
  TebTrajectory band;
  TebParams params;
};

// Band anchored at the current estimate, following the remaining path.
// progress is the arc length of the last fix on this path; the nearest
// search window is bounded ahead of it so a path that doubles back past
// the vehicle cannot teleport the band across the turn.
LocalPlan refresh_band(const GlobalPath& path, const Pose2D& fused,
                       const TebParams& params, double& progress) {
  std::vector<double> along_path(path.waypoints.size(), 0.0);
  for (size_t i = 1; i < path.waypoints.size(); ++i) {
    along_path[i] =
        along_path[i - 1] + pose_distance(path.waypoints[i - 1], path.waypoints[i]);
  }
  size_t nearest = 0;
  double best = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < path.waypoints.size(); ++i) {
    if (along_path[i] > progress + 0.8) break;
    const double d = pose_distance(path.waypoints[i], fused);
    if (d < best) {
      best = d;
      nearest = i;
    }
  }
  progress = along_path[nearest];
  // Rejoin the path a short lookahead past the closest waypoint so the first
  // band segment leads the vehicle instead of pulling it sideways.
  size_t first = nearest;
  double along = 0.0;
  while (first + 1 < path.waypoints.size() && along < 0.4) {
    along += pose_distance(path.waypoints[first], path.waypoints[first + 1]);
    ++first;
  }
  GlobalPath remainder;
  remainder.waypoints.push_back(fused);
  double walked = 0.0;
  Pose2D prev = fused;
  for (size_t i = first; i < path.waypoints.size(); ++i) {
    walked += pose_distance(prev, path.waypoints[i]);
    remainder.waypoints.push_back(path.waypoints[i]);
    prev = path.waypoints[i];
    if (walked > kBandHorizon) break;
  }
  // A short band still needs enough poses to bend an arrival arc.
  TebParams dense = params;
  dense.ref_resolution = std::clamp(walked / 5.0, 0.05, params.ref_resolution);
  return {init_from_global(remainder, dense), dense};
}

// Rewrites the path tail as a straight dock leg along the goal heading so
// the vehicle arrives aligned instead of ending on a raw cell center.
void append_goal_waypoints(GlobalPath& path, const Pose2D& goal, const Costmap& costmap) {
  while (path.waypoints.size() > 1 &&
         pose_distance(path.waypoints.back(), goal) < 1.1) {
    path.waypoints.pop_back();
  }
  for (const double back : {1.0, 0.5}) {
    const Pose2D pre{goal.x - back * std::cos(goal.theta),
                     goal.y - back * std::sin(goal.theta), goal.theta};
    if (cost_at(costmap, {pre.x, pre.y}) < Costmap::kInscribed) {
      path.waypoints.push_back(pre);
    }
  }
  path.waypoints.push_back(goal);
}

// Point exactly lead meters along the band, interpolated on its polyline so
// a short curled band still yields a nearby target on the feasible arc.
Pose2D pick_carrot(const TebTrajectory& band, double lead) {
  double walked = 0.0;
  for (int i = 0; i + 1 < band.size(); ++i) {
    const Pose2D& a = band.poses[i];
    const Pose2D& b = band.poses[i + 1];
    const double seg = pose_distance(a, b);
    if (seg > 1e-12 && walked + seg >= lead) {
      const double s = (lead - walked) / seg;
      return {a.x + s * (b.x - a.x), a.y + s * (b.y - a.y),
              std::atan2(b.y - a.y, b.x - a.x)};
    }
    walked += seg;
  }
  return band.poses.back();
}

}  // namespace

MappingResult run_mapping(const Scenario& sc) {
  validate(sc);
  if (sc.mission.mapping.empty()) throw ConfigError("mission has no mapping script");

  RandomStream base(sc.seed);
  RandomStream lidar_rng = base.fork(kLidarStream);
  const double dt = 1.0 / sc.control.rate;

  VehicleState truth;
  truth.pose = sc.start;

  std::vector<LaserScan> scans;
  MappingResult out;
  double t = 0.0;

  auto sense = [&](const DriveCommand& cmd) {
    const double clearance =
        world_clearance(sc.world, truth.pose.position(), sc.vehicle.footprint_radius_circumscribed);
    if (clearance <= 0.0) {
      throw CollisionError("mapping script collides at t=" + time_tag(t));
    }
    LaserScan scan = corrupt_scan(cast_scan(sc.world, truth.pose, sc.lidar), sc.sensor_noise,
                                  lidar_rng);
    scan.timestamp = t;
    scans.push_back(scan);
    RunRecord rec;
    rec.t = t;
    rec.ground_truth = truth.pose;
    rec.command = cmd;
    rec.min_clearance = clearance;
    out.log.records.push_back(rec);
  };

  sense({0.0, 0.0});
  for (const MissionCommand& mc : sc.mission.mapping) {
    const int steps = std::max(1, static_cast<int>(std::lround(mc.duration * sc.control.rate)));
    for (int i = 0; i < steps; ++i) {
      truth = step_vehicle(truth, mc.command, dt, sc.vehicle);
      t += dt;
      sense(mc.command);
    }
  }

  out.slam = run_slam(scans, sc.start, sc.slam);
  for (size_t i = 0; i < out.log.records.size(); ++i) {
    const size_t j = std::min(i, out.slam.trajectory.size() - 1);
    out.log.records[i].estimate = out.slam.trajectory[j];
    out.log.records[i].mcl = out.slam.trajectory[j];
  }
  return out;
}

RunLog run_navigation(const Scenario& sc, const OccupancyGrid& map,
                      const NavigationOptions& options) {
  validate(sc);
  if (sc.mission.goals.empty()) throw ConfigError("mission has no goals");

  const Costmap costmap = build_costmap(map, sc.costmap);

  RandomStream base(sc.seed);
  RandomStream lidar_rng = base.fork(kLidarStream);
  RandomStream imu_rng = base.fork(kImuStream);
  AmclFilter filter(map, sc.mcl, base.fork(kMclStream).next_u64());
  filter.seed_around(sc.start, 0.05, 0.02, sc.mcl_particles);

  Eigen::Matrix<double, 5, 5> init_cov = Eigen::Matrix<double, 5, 5>::Zero();
  init_cov.diagonal() << 1e-4, 1e-4, 1e-4, 1e-2, 1e-2;
  EkfState ekf = ekf_init(sc.start, init_cov);
  // Steering is instantaneous, so true omega can jump between steps; the
  // velocity states carry enough process noise to keep the gates open.
  Eigen::Matrix<double, 5, 5> process = Eigen::Matrix<double, 5, 5>::Zero();
  process.diagonal() << 1e-4, 1e-4, 1e-4, 2.0, 4.0;
  const double imu_var = std::max(sc.imu_yaw_rate_noise * sc.imu_yaw_rate_noise, 1e-6);

  VehicleState truth;
  truth.pose = sc.start;
  PidState pid_state;

  RunLog log;
  const double dt = 1.0 / sc.control.rate;
  double t = 0.0;
  int record_index = 0;

  for (const Pose2D& goal : sc.mission.goals) {
    GoalSummary summary;
    const double goal_start = t;
    double driven = 0.0;

    GlobalPath path;
    try {
      path = plan_global(costmap, ekf.pose(), goal, sc.planner);
    } catch (const NoPathError&) {
      log.goals.push_back(summary);
      continue;
    }
    append_goal_waypoints(path, goal, costmap);

    LocalPlan local;
    double progress = 0.0;
    int since_replan = sc.control.replan_every;  // refresh on the first step
    int since_global = 0;

    while (true) {
      const Pose2D fused = ekf.pose();
      const double goal_dist = pose_distance(fused, goal);
      if (goal_dist < sc.control.goal_tol_xy &&
          std::abs(wrap_angle(fused.theta - goal.theta)) < sc.control.goal_tol_theta) {
        summary.reached = true;
        break;
      }
      if (t - goal_start > sc.control.goal_timeout) break;

      // A fresh global plan recovers from overshoots and detours; keep the
      // old path when the current estimate momentarily has no route.
      if (++since_global >= 40) {
        since_global = 0;
        try {
          GlobalPath fresh = plan_global(costmap, fused, goal, sc.planner);
          append_goal_waypoints(fresh, goal, costmap);
          path = std::move(fresh);
        } catch (const NavError&) {
        }
      }

      if (since_replan >= sc.control.replan_every) {
        since_replan = 0;
        local = refresh_band(path, fused, sc.teb);
        const std::vector<Vec2> obstacles = lethal_points_near(costmap, local.band.poses, 3.0);
        local.band = optimize(local.band, obstacles, local.params, 40);
      }
      ++since_replan;

      // Dock by riding a carrot that slides along the goal's approach line;
      // the band degenerates this close and bearing feedback to a target
      // underfoot would spin the vehicle. A pass that overshoots exits to
      // band tracking and replans promptly for another approach.
      const double hx = std::cos(goal.theta);
      const double hy = std::sin(goal.theta);
      const double s_along = (fused.x - goal.x) * hx + (fused.y - goal.y) * hy;
      const bool docking = goal_dist < 0.55 && s_along < 0.12 &&
                           std::abs(wrap_angle(fused.theta - goal.theta)) < 1.0;
      Twist2D feedforward;
      Pose2D carrot;
      if (docking) {
        const double s_c = std::min(s_along + 0.35, 0.3);
        feedforward = {0.15, 0.0};
        carrot = {goal.x + s_c * hx, goal.y + s_c * hy, goal.theta};
      } else {
        if (goal_dist < 0.55 && s_along >= 0.12 && since_global >= 20) {
          since_global = 39;
        }
        feedforward = command_from_teb(local.band);
        carrot = pick_carrot(local.band, 0.3);
      }
      Twist2D twist = pid_track(fused, feedforward, carrot, sc.pid, dt, pid_state);
      // Creep into the dock so the heading settles before the position check.
      if (docking) {
        const double cap = std::max(0.12, 0.7 * goal_dist);
        twist.v = std::clamp(twist.v, -cap, cap);
      }
      const DriveCommand cmd =
          ackermann_convert(twist, sc.vehicle.wheelbase, sc.vehicle.max_steer).command;

      const VehicleState prev = truth;
      truth = step_vehicle(truth, cmd, dt, sc.vehicle);
      t += dt;
      driven += pose_distance(prev.pose, truth.pose);

      const double clearance = world_clearance(sc.world, truth.pose.position(),
                                               sc.vehicle.footprint_radius_circumscribed);
      if (clearance <= 0.0) {
        throw CollisionError("vehicle collides at t=" + time_tag(t));
      }

      LaserScan scan =
          corrupt_scan(cast_scan(sc.world, truth.pose, sc.lidar), sc.sensor_noise, lidar_rng);
      scan.timestamp = t;
      const ImuSample imu = sample_imu(prev, truth, dt, sc.imu_yaw_rate_noise,
                                       sc.imu_accel_noise, imu_rng);

      const PoseEstimate mcl_est = filter.update(truth.pose, scan);

      ekf = ekf_predict(ekf, dt, process);
      Eigen::VectorXd z_imu(1);
      z_imu << imu.yaw_rate;
      Eigen::MatrixXd r_imu(1, 1);
      r_imu << imu_var;
      ekf = ekf_update(ekf, z_imu, MeasurementModel::kImuYawRate, r_imu).state;

      // The particle-cloud covariance understates estimator error once the
      // cloud is tight; floor it so the pose gate stays honest.
      Eigen::VectorXd z_pose(3);
      z_pose << mcl_est.pose.x, mcl_est.pose.y, mcl_est.pose.theta;
      Eigen::MatrixXd r_pose = mcl_est.covariance;
      r_pose(0, 0) += 9e-4;
      r_pose(1, 1) += 9e-4;
      r_pose(2, 2) += 4e-4;
      ekf = ekf_update(ekf, z_pose, MeasurementModel::kMclPose, r_pose).state;

      RunRecord rec;
      rec.t = t;
      rec.ground_truth = truth.pose;
      rec.estimate = ekf.pose();
      rec.mcl = mcl_est.pose;
      rec.command = cmd;
      rec.min_clearance = clearance;
      log.records.push_back(rec);

      if (std::getenv("NAVSIM_TRACE")) {
        std::fprintf(stderr,
                     "t=%.2f gt=(%.3f,%.3f,%.3f) ekf=(%.3f,%.3f,%.3f) "
                     "mcl=(%.3f,%.3f,%.3f) cmd=(%.3f,%.3f) ff=(%.3f,%.3f) "
                     "carrot=(%.2f,%.2f) clr=%.3f band=%d\n",
                     t, truth.pose.x, truth.pose.y, truth.pose.theta, rec.estimate.x,
                     rec.estimate.y, rec.estimate.theta, mcl_est.pose.x, mcl_est.pose.y,
                     mcl_est.pose.theta, cmd.v, cmd.phi, feedforward.v, feedforward.omega,
                     carrot.x, carrot.y, clearance, local.band.size());
      }

      if (options.overlays && record_index % std::max(1, options.overlay_every) == 0) {
        FrameOverlay overlay;
        for (const Particle& p : filter.particles().particles) {
          overlay.particles.push_back({p.pose.x, p.pose.y});
        }
        overlay.global_path = path.waypoints;
        overlay.band = local.band.poses;
        (*options.overlays)[record_index] = std::move(overlay);
      }
      ++record_index;
    }

    summary.time = t - goal_start;
    summary.path_length = driven;
    log.goals.push_back(summary);
  }
  return log;
}

}  // namespace navsim
