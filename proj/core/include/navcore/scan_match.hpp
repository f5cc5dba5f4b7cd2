#ifndef NAVCORE_SCAN_MATCH_HPP
#define NAVCORE_SCAN_MATCH_HPP

#include <Eigen/Dense>

#include "navcore/lidar.hpp"
#include "navcore/types.hpp"

namespace navcore {

struct ScanMatchResult {
  Pose2D delta;  // pose of the curr sensor frame expressed in the prev frame
  Eigen::Matrix3d covariance = Eigen::Matrix3d::Zero();
  double fitness = 0.0;  // inlier fraction of the usable curr beams, in [0, 1]
  bool converged = false;
  int iterations = 0;
};

struct ScanMatchParams {
  int max_iterations = 20;             // per resolution level
  double step_tolerance = 1e-6;        // step norm that counts as converged
  double max_correspondence = 0.5;     // m, beyond this a pair is an outlier
  double fitness_threshold = 0.6;      // callers treat lower fitness as a miss
};

// Point-to-line ICP between consecutive scans, coarse to fine over beam
// decimation factors 4, 2, 1. Both scans must share a lidar configuration.
// Scans with fewer than 10 returning beams raise a degenerate-scan error.
ScanMatchResult scan_match(const LaserScan& prev, const LaserScan& curr,
                           const Pose2D& initial_guess, const ScanMatchParams& params = {});

}  // namespace navcore

#endif  // NAVCORE_SCAN_MATCH_HPP
