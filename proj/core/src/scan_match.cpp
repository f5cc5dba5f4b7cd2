#include "navcore/scan_match.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "navcore/errors.hpp"

namespace navcore {

namespace {

std::vector<Vec2> scan_points(const LaserScan& scan) {
  std::vector<Vec2> points;
  points.reserve(scan.ranges.size());
  for (int i = 0; i < scan.size(); ++i) {
    const double r = scan.ranges[i];
    if (r >= scan.z_max) continue;  // no-return beam
    const double a = scan.angle(i);
    points.push_back({r * std::cos(a), r * std::sin(a)});
  }
  return points;
}

std::vector<Vec2> decimate_points(const std::vector<Vec2>& points, int stride) {
  if (stride <= 1) return points;
  std::vector<Vec2> out;
  out.reserve(points.size() / stride + 1);
  for (size_t i = 0; i < points.size(); i += stride) out.push_back(points[i]);
  return out;
}

int nearest_index(const std::vector<Vec2>& cloud, const Vec2& p) {
  int best = 0;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < cloud.size(); ++i) {
    const double d2 = (cloud[i] - p).squared_norm();
    if (d2 < best_d2) {
      best_d2 = d2;
      best = static_cast<int>(i);
    }
  }
  return best;
}

}  // namespace

ScanMatchResult scan_match(const LaserScan& prev, const LaserScan& curr,
                           const Pose2D& initial_guess, const ScanMatchParams& params) {
  const std::vector<Vec2> prev_points = scan_points(prev);
  const std::vector<Vec2> curr_points = scan_points(curr);
  if (prev_points.size() < 10 || curr_points.size() < 10) {
    throw DegenerateScanError("scan has fewer than 10 returning beams");
  }

  ScanMatchResult result;
  result.delta = initial_guess;
  const double gate2 = params.max_correspondence * params.max_correspondence;

  static constexpr int kLevels[3] = {4, 2, 1};
  for (int level : kLevels) {
    const std::vector<Vec2> ref = decimate_points(prev_points, level);
    const std::vector<Vec2> moving = decimate_points(curr_points, level);
    if (ref.size() < 3 || moving.size() < 3) continue;

    // Once the coarse level has aligned the clouds, shrink the gate so
    // occlusion-boundary points stop pairing across depth jumps.
    const double level_gate = params.max_correspondence * level / kLevels[0];
    const double level_gate2 = level_gate * level_gate;

    result.converged = false;
    for (int iter = 0; iter < params.max_iterations; ++iter) {
      ++result.iterations;
      const double c = std::cos(result.delta.theta);
      const double s = std::sin(result.delta.theta);

      Eigen::Matrix3d hessian = Eigen::Matrix3d::Zero();
      Eigen::Vector3d gradient = Eigen::Vector3d::Zero();
      int matched = 0;

      for (const Vec2& q : moving) {
        const Vec2 rotated{c * q.x - s * q.y, s * q.x + c * q.y};
        const Vec2 p{rotated.x + result.delta.x, rotated.y + result.delta.y};

        const int j = nearest_index(ref, p);
        if ((ref[j] - p).squared_norm() > level_gate2) continue;

        // Second support point: the closer of the scan-order neighbors.
        int j2 = -1;
        if (j > 0) j2 = j - 1;
        if (j + 1 < static_cast<int>(ref.size())) {
          if (j2 < 0 || (ref[j + 1] - p).squared_norm() < (ref[j2] - p).squared_norm()) {
            j2 = j + 1;
          }
        }

        Vec2 normal;
        const Vec2 seg = ref[j2] - ref[j];
        const double seg_len = seg.norm();
        if (seg_len > 1e-9) {
          normal = {-seg.y / seg_len, seg.x / seg_len};
        } else {
          const Vec2 diff = p - ref[j];
          const double len = diff.norm();
          if (len < 1e-12) {
            // Exact coincidence: zero residual regardless of direction.
            normal = {1.0, 0.0};
          } else {
            normal = {diff.x / len, diff.y / len};
          }
        }

        const double residual = normal.dot(p - ref[j]);
        const Eigen::Vector3d jac(normal.x, normal.y,
                                  normal.x * -rotated.y + normal.y * rotated.x);
        hessian += jac * jac.transpose();
        gradient += jac * residual;
        ++matched;
      }

      if (matched < 3) break;  // not enough structure at this level

      const Eigen::LDLT<Eigen::Matrix3d> solver(hessian);
      if (solver.info() != Eigen::Success) break;
      const Eigen::Vector3d step = solver.solve(-gradient);
      if (!step.allFinite()) break;

      result.delta.x += step(0);
      result.delta.y += step(1);
      result.delta.theta = wrap_angle(result.delta.theta + step(2));
      if (step.norm() < params.step_tolerance) {
        result.converged = true;
        break;
      }
    }
  }

  // Final inlier census and residual statistics at the solved delta.
  const double c = std::cos(result.delta.theta);
  const double s = std::sin(result.delta.theta);
  Eigen::Matrix3d hessian = Eigen::Matrix3d::Zero();
  double sse = 0.0;
  int inliers = 0;
  for (const Vec2& q : curr_points) {
    const Vec2 rotated{c * q.x - s * q.y, s * q.x + c * q.y};
    const Vec2 p{rotated.x + result.delta.x, rotated.y + result.delta.y};
    const int j = nearest_index(prev_points, p);
    if ((prev_points[j] - p).squared_norm() > gate2) continue;
    ++inliers;

    int j2 = (j > 0) ? j - 1 : j + 1;
    if (j + 1 < static_cast<int>(prev_points.size()) && j > 0 &&
        (prev_points[j + 1] - p).squared_norm() < (prev_points[j - 1] - p).squared_norm()) {
      j2 = j + 1;
    }
    Vec2 normal;
    const Vec2 seg = prev_points[j2] - prev_points[j];
    const double seg_len = seg.norm();
    if (seg_len > 1e-9) {
      normal = {-seg.y / seg_len, seg.x / seg_len};
    } else {
      continue;
    }
    const double residual = normal.dot(p - prev_points[j]);
    const Eigen::Vector3d jac(normal.x, normal.y,
                              normal.x * -rotated.y + normal.y * rotated.x);
    hessian += jac * jac.transpose();
    sse += residual * residual;
  }

  result.fitness = static_cast<double>(inliers) / static_cast<double>(curr_points.size());
  if (inliers > 3) {
    const double sigma2 = sse / static_cast<double>(inliers - 3);
    const Eigen::Matrix3d regularized =
        hessian + 1e-9 * Eigen::Matrix3d::Identity();
    result.covariance = sigma2 * regularized.inverse();
  }
  return result;
}

}  // namespace navcore
