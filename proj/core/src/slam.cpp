#include "navcore/slam.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "navcore/errors.hpp"

namespace navcore {

namespace {

std::vector<Vec2> hit_points(const LaserScan& scan) {
  std::vector<Vec2> points;
  points.reserve(scan.ranges.size());
  for (int i = 0; i < scan.size(); ++i) {
    const double r = scan.ranges[i];
    if (r >= scan.z_max) continue;
    const double a = scan.angle(i);
    points.push_back({r * std::cos(a), r * std::sin(a)});
  }
  return points;
}

// Coarse map for the first matching phase: each cell takes the strongest
// occupancy evidence of its (up to) four children, so walls survive pooling.
OccupancyGrid half_resolution(const OccupancyGrid& grid) {
  const int w = (grid.width() + 1) / 2;
  const int h = (grid.height() + 1) / 2;
  OccupancyGrid out(w, h, grid.resolution() * 2.0, grid.origin());
  std::vector<double> pooled(static_cast<size_t>(w) * h,
                             -std::numeric_limits<double>::infinity());
  for (int r = 0; r < grid.height(); ++r) {
    for (int c = 0; c < grid.width(); ++c) {
      if (!grid.observed({r, c})) continue;
      double& slot = pooled[static_cast<size_t>(r / 2) * w + c / 2];
      slot = std::max(slot, grid.log_odds({r, c}));
    }
  }
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const double v = pooled[static_cast<size_t>(r) * w + c];
      if (std::isfinite(v)) out.update({r, c}, v);
    }
  }
  return out;
}

struct Objective {
  double value = 0.0;
  int matched = 0;
  Eigen::Matrix3d hessian = Eigen::Matrix3d::Zero();
  Eigen::Vector3d gradient = Eigen::Vector3d::Zero();

  // Endpoints that fell off the map count at the worst possible residual,
  // otherwise shoving points off the edge would look like progress.
  double penalized(size_t total) const {
    return value + static_cast<double>(total - static_cast<size_t>(matched));
  }
};

Objective leaf_term(const OccupancyGrid& grid, const Vec2& q, double c, double s,
                    const Pose2D& pose) {
  Objective out;
  const Vec2 w{pose.x + c * q.x - s * q.y, pose.y + s * q.x + c * q.y};
  if (!grid.in_interior(w)) return out;
  const Interpolation m = interpolate(grid, w);
  const double residual = 1.0 - m.value;
  out.value = residual * residual;
  out.matched = 1;
  const Vec2 dth{-s * q.x - c * q.y, c * q.x - s * q.y};
  const Eigen::Vector3d jac(-m.gradient.x, -m.gradient.y,
                            -(m.gradient.x * dth.x + m.gradient.y * dth.y));
  out.hessian = jac * jac.transpose();
  out.gradient = jac * residual;
  return out;
}

Objective combine(const Objective& a, const Objective& b) {
  return {a.value + b.value, a.matched + b.matched, a.hessian + b.hessian,
          a.gradient + b.gradient};
}

// Balanced reduction whose tree shape is symmetric under reversing the point
// list, so a scan and its mirror accumulate identically.
Objective reduce_range(const OccupancyGrid& grid, const std::vector<Vec2>& points,
                       size_t lo, size_t hi, double c, double s, const Pose2D& pose) {
  const size_t n = hi - lo;
  if (n == 0) return {};
  if (n == 1) return leaf_term(grid, points[lo], c, s, pose);
  if (n % 2 == 0) {
    const size_t mid = lo + n / 2;
    return combine(reduce_range(grid, points, lo, mid, c, s, pose),
                   reduce_range(grid, points, mid, hi, c, s, pose));
  }
  const size_t mid = lo + n / 2;
  return combine(combine(reduce_range(grid, points, lo, mid, c, s, pose),
                         reduce_range(grid, points, mid + 1, hi, c, s, pose)),
                 leaf_term(grid, points[mid], c, s, pose));
}

Objective evaluate(const OccupancyGrid& grid, const std::vector<Vec2>& points,
                   const Pose2D& pose) {
  const double c = std::cos(pose.theta);
  const double s = std::sin(pose.theta);
  return reduce_range(grid, points, 0, points.size(), c, s, pose);
}

// Determinant-over-trace scale test; unlike an iterative eigensolve this is
// the same floating-point expression for a map and its mirror image.
bool usable_normal_matrix(const Eigen::Matrix3d& h) {
  const double scale = h.trace();
  return h.determinant() > 1e-12 * std::max(1.0, scale * scale * scale);
}

}  // namespace

void integrate_scan(OccupancyGrid& grid, const Pose2D& pose, const LaserScan& scan) {
  const Vec2 sensor{pose.x, pose.y};
  const GridIndex sensor_cell = grid.cell_at(sensor);
  if (!grid.in_bounds(sensor_cell)) {
    throw OutOfBoundsError("sensor pose outside the grid extent");
  }

  // Per-scan hit/free counts per cell, applied as one delta so the result
  // does not depend on beam order; clamping happens once per scan.
  const size_t n = static_cast<size_t>(grid.width()) * grid.height();
  std::vector<int32_t> hits(n, 0), frees(n, 0);
  std::vector<size_t> touched;
  touched.reserve(scan.ranges.size() * 8);

  for (int i = 0; i < scan.size(); ++i) {
    const double r = scan.ranges[i];
    const bool hit = r < scan.z_max;
    const double a = pose.theta + scan.angle(i);
    const Vec2 end{sensor.x + r * std::cos(a), sensor.y + r * std::sin(a)};
    const GridIndex end_cell = grid.cell_at(end);
    for (const GridIndex& cell : traverse_cells(grid, sensor, end)) {
      const size_t flat = static_cast<size_t>(cell.row) * grid.width() + cell.col;
      if (hit && cell == end_cell) {
        if (hits[flat] == 0 && frees[flat] == 0) touched.push_back(flat);
        ++hits[flat];
      } else if (!(cell == sensor_cell)) {
        if (hits[flat] == 0 && frees[flat] == 0) touched.push_back(flat);
        ++frees[flat];
      }
    }
  }

  for (const size_t flat : touched) {
    const GridIndex cell{static_cast<int>(flat / grid.width()),
                         static_cast<int>(flat % grid.width())};
    grid.update(cell, hits[flat] * kLogOddsOccupied - frees[flat] * kLogOddsFree);
  }
}

MapMatchResult match_scan_to_map(const OccupancyGrid& grid, const LaserScan& scan,
                                 const Pose2D& init, const MapMatchParams& params) {
  if (!grid.in_bounds(grid.cell_at({init.x, init.y}))) {
    throw OutOfBoundsError("matcher init outside the grid extent");
  }
  MapMatchResult result;
  result.pose = init;

  const std::vector<Vec2> points = hit_points(scan);
  if (points.size() < 3) return result;

  const OccupancyGrid half = half_resolution(grid);
  const OccupancyGrid* phases[2] = {&half, &grid};
  for (int phase = 0; phase < 2; ++phase) {
    const OccupancyGrid& level = *phases[phase];
    const int budget = (phase == 0) ? params.max_iterations / 2
                                    : params.max_iterations - result.iterations;
    const Pose2D phase_start = result.pose;
    result.converged = false;

    Objective current = evaluate(level, points, result.pose);
    if (current.matched < 3) continue;

    for (int iter = 0; iter < budget; ++iter) {
      ++result.iterations;
      if (!usable_normal_matrix(current.hessian)) break;
      const Eigen::Vector3d step =
          current.hessian.ldlt().solve(-current.gradient);
      if (!step.allFinite()) break;
      // A sub-tolerance step is convergence before it is applied, so a
      // scan already consistent with the map returns the seed untouched.
      if (step.norm() < params.step_tolerance) {
        result.converged = true;
        break;
      }

      // Backtracking keeps the objective strictly decreasing; if no scale
      // helps we are at a discrete optimum and stop where we stand.
      bool accepted = false;
      double scale = 1.0;
      for (int halving = 0; halving < 9; ++halving, scale *= 0.5) {
        const Pose2D candidate{result.pose.x + scale * step(0),
                               result.pose.y + scale * step(1),
                               wrap_angle(result.pose.theta + scale * step(2))};
        const Objective next = evaluate(level, points, candidate);
        if (next.penalized(points.size()) < current.penalized(points.size())) {
          result.pose = candidate;
          current = next;
          accepted = true;
          break;
        }
      }
      if (!accepted) {
        result.converged = true;
        break;
      }
      if (scale * step.norm() < params.step_tolerance) {
        result.converged = true;
        break;
      }
    }

    // The coarse lattice can park the pose half a fine cell off, in the
    // flat unknown region where the full grid offers no pull back. Keep
    // the coarse result only when the full objective actually improved.
    if (phase == 0) {
      const double moved = evaluate(grid, points, result.pose).penalized(points.size());
      const double stayed = evaluate(grid, points, phase_start).penalized(points.size());
      if (moved >= stayed) result.pose = phase_start;
    }
  }

  result.hessian = evaluate(grid, points, result.pose).hessian;
  return result;
}

SlamResult run_slam(const std::vector<LaserScan>& scans, const Pose2D& initial_pose,
                    const SlamParams& params) {
  if (scans.empty()) throw DomainError("scan stream is empty");

  SlamResult out{grid_for_bounds(params.bounds, params.resolution, params.margin),
                 {},
                 0};
  integrate_scan(out.grid, initial_pose, scans.front());
  out.trajectory.push_back(initial_pose);

  Pose2D pose = initial_pose;
  for (size_t i = 1; i < scans.size(); ++i) {
    const MapMatchResult match = match_scan_to_map(out.grid, scans[i], pose, params.match);
    const double jump = std::hypot(match.pose.x - pose.x, match.pose.y - pose.y);
    if (jump > params.divergence_threshold) {
      ++out.skipped_scans;
      continue;
    }
    pose = match.pose;
    integrate_scan(out.grid, pose, scans[i]);
    out.trajectory.push_back(pose);
  }
  return out;
}

}  // namespace navcore
