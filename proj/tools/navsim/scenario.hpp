#ifndef NAVSIM_SCENARIO_HPP
#define NAVSIM_SCENARIO_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "navcore/controller.hpp"
#include "navcore/costmap.hpp"
#include "navcore/global_planner.hpp"
#include "navcore/lidar.hpp"
#include "navcore/mcl.hpp"
#include "navcore/slam.hpp"
#include "navcore/teb.hpp"
#include "navcore/world.hpp"

namespace navsim {

struct MissionCommand {
  double duration = 0.0;  // s, held at the control rate
  navcore::DriveCommand command;
};

struct Mission {
  std::vector<MissionCommand> mapping;
  std::vector<navcore::Pose2D> goals;
};

struct ControlParams {
  double rate = 20.0;             // Hz
  int replan_every = 5;           // control steps between band refreshes
  double goal_tol_xy = 0.2;       // m
  double goal_tol_theta = navcore::kPi / 18.0;
  double goal_timeout = 90.0;     // s of simulated time per goal
};

// Everything one run needs, parsed from a sectioned key/value file.
struct Scenario {
  uint64_t seed = 1;
  navcore::WorldModel world;
  navcore::VehicleParams vehicle;
  navcore::Pose2D start;
  navcore::LidarConfig lidar;
  navcore::BeamNoiseParams sensor_noise;
  double imu_yaw_rate_noise = 0.002;
  double imu_accel_noise = 0.05;
  navcore::SlamParams slam;
  navcore::AmclParams mcl;
  int mcl_particles = 1000;
  navcore::InflationParams costmap;
  navcore::PlannerParams planner;
  navcore::TebParams teb;
  navcore::PidGains pid;
  ControlParams control;
  Mission mission;
};

Scenario parse_scenario_text(const std::string& text);
Scenario load_scenario(const std::string& path);

// Cross-checks every embedded parameter block and the start pose footprint.
void validate(const Scenario& scenario);

}  // namespace navsim

#endif  // NAVSIM_SCENARIO_HPP
