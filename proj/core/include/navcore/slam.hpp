#ifndef NAVCORE_SLAM_HPP
#define NAVCORE_SLAM_HPP

#include <vector>

#include <Eigen/Dense>

#include "navcore/grid.hpp"
#include "navcore/lidar.hpp"
#include "navcore/types.hpp"

namespace navcore {

// Log-odds increments per beam observation. One hit outweighs two misses.
inline constexpr double kLogOddsOccupied = 0.85;
inline constexpr double kLogOddsFree = 0.4;

struct MapMatchParams {
  int max_iterations = 30;  // shared budget across both resolution phases
  double step_tolerance = 1e-5;
};

struct MapMatchResult {
  Pose2D pose;
  int iterations = 0;
  bool converged = false;
  Eigen::Matrix3d hessian = Eigen::Matrix3d::Zero();
};

// Ray-carves every beam into the grid: cells strictly between the sensor
// cell and the endpoint cell lose kLogOddsFree, the endpoint cell gains
// kLogOddsOccupied when the beam actually returned. Max-range beams and
// beams leaving the grid carve free space only.
void integrate_scan(OccupancyGrid& grid, const Pose2D& pose, const LaserScan& scan);

// Gauss-Newton alignment of scan endpoints against the interpolated map,
// half resolution first, then full. Steps are accepted only when they
// lower the sum of squared (1 - occupancy) endpoint residuals.
MapMatchResult match_scan_to_map(const OccupancyGrid& grid, const LaserScan& scan,
                                 const Pose2D& init, const MapMatchParams& params = {});

struct SlamParams {
  Aabb bounds{-5.0, -5.0, 5.0, 5.0};  // world extent the map must cover
  double resolution = 0.05;
  double margin = 1.0;
  double divergence_threshold = 0.5;  // meters of pose jump that voids a match
  MapMatchParams match;
};

struct SlamResult {
  OccupancyGrid grid;
  std::vector<Pose2D> trajectory;  // one pose per integrated scan
  int skipped_scans = 0;
};

// Odometry-free mapping: each scan is matched against the map built so far,
// then integrated at the matched pose. The first scan seeds the map at
// initial_pose without matching.
SlamResult run_slam(const std::vector<LaserScan>& scans, const Pose2D& initial_pose,
                    const SlamParams& params = {});

}  // namespace navcore

#endif  // NAVCORE_SLAM_HPP
