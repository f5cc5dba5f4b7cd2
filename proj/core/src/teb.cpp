#include "navcore/teb.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "navcore/errors.hpp"

namespace navcore {

namespace {

constexpr double kTimeFloorWeight = 1000.0;
constexpr double kFloorMargin = 1.05;  // barrier activates below kFloorMargin * floor
constexpr int kMaxBandPoses = 400;

double clamped_tau(double tau) { return std::max(tau, kTebMinTimeDiff); }

// Residuals r with value = |r|^2 and the dense Jacobian over the raw free
// variables: interior pose coordinates, then the time intervals themselves
// (not their logs; the optimizer rescales columns for its log-space steps).
struct Assembly {
  double value = 0.0;
  Eigen::VectorXd residuals;
  Eigen::MatrixXd jacobian;
};

Assembly assemble(const TebTrajectory& teb, const std::vector<Vec2>& obstacles,
                  const TebParams& p) {
  const int n = teb.size();
  const int segs = n - 1;
  const int vars = 3 * (n - 2) + segs;
  const int time_base = 3 * (n - 2);
  const int rows = 5 * segs + (n - 2) + n;

  Assembly out;
  out.residuals = Eigen::VectorXd::Zero(rows);
  out.jacobian = Eigen::MatrixXd::Zero(rows, vars);

  auto pose_col = [&](int k, int c) { return (k >= 1 && k <= n - 2) ? 3 * (k - 1) + c : -1; };
  auto put = [&](int row, int col, double v) {
    if (col >= 0) out.jacobian(row, col) += v;
  };

  // Per-segment geometry, with divisions clamped at the interval floor.
  std::vector<double> dx(segs), dy(segs), len(segs), tauc(segs), vel(segs);
  std::vector<bool> tau_free(segs);
  for (int i = 0; i < segs; ++i) {
    dx[i] = teb.poses[i + 1].x - teb.poses[i].x;
    dy[i] = teb.poses[i + 1].y - teb.poses[i].y;
    len[i] = std::hypot(dx[i], dy[i]);
    tauc[i] = clamped_tau(teb.time_diffs[i]);
    tau_free[i] = teb.time_diffs[i] > kTebMinTimeDiff;
    vel[i] = len[i] / tauc[i];
  }

  int row = 0;

  const double sqrt_wt = std::sqrt(p.weights.time);
  for (int i = 0; i < segs; ++i, ++row) {
    const double tau = teb.time_diffs[i];
    out.residuals(row) = sqrt_wt * std::sqrt(tau);
    put(row, time_base + i, sqrt_wt * 0.5 / std::sqrt(tau));
  }

  const double floor_limit = kFloorMargin * kTebMinTimeDiff;
  const double sqrt_wf = std::sqrt(kTimeFloorWeight);
  for (int i = 0; i < segs; ++i, ++row) {
    const double h = floor_limit - teb.time_diffs[i];
    if (h <= 0.0) continue;
    out.residuals(row) = sqrt_wf * h;
    put(row, time_base + i, -sqrt_wf);
  }

  const double sqrt_wk = std::sqrt(p.weights.kinematics);
  for (int i = 0; i < segs; ++i, ++row) {
    const double ca = std::cos(teb.poses[i].theta), sa = std::sin(teb.poses[i].theta);
    const double cb = std::cos(teb.poses[i + 1].theta), sb = std::sin(teb.poses[i + 1].theta);
    const double sum_c = ca + cb, sum_s = sa + sb;
    out.residuals(row) = sqrt_wk * (sum_c * dy[i] - sum_s * dx[i]);
    put(row, pose_col(i, 0), sqrt_wk * sum_s);
    put(row, pose_col(i + 1, 0), -sqrt_wk * sum_s);
    put(row, pose_col(i, 1), -sqrt_wk * sum_c);
    put(row, pose_col(i + 1, 1), sqrt_wk * sum_c);
    put(row, pose_col(i, 2), sqrt_wk * (-sa * dy[i] - ca * dx[i]));
    put(row, pose_col(i + 1, 2), sqrt_wk * (-sb * dy[i] - cb * dx[i]));
  }

  const double sqrt_wv = std::sqrt(p.weights.velocity);
  for (int i = 0; i < segs; ++i, ++row) {
    const double h = vel[i] - p.max_vel;
    if (h <= 0.0) continue;
    out.residuals(row) = sqrt_wv * h;
    if (len[i] > 1e-12) {
      const double gx = dx[i] / (len[i] * tauc[i]), gy = dy[i] / (len[i] * tauc[i]);
      put(row, pose_col(i, 0), -sqrt_wv * gx);
      put(row, pose_col(i + 1, 0), sqrt_wv * gx);
      put(row, pose_col(i, 1), -sqrt_wv * gy);
      put(row, pose_col(i + 1, 1), sqrt_wv * gy);
    }
    if (tau_free[i]) put(row, time_base + i, -sqrt_wv * vel[i] / tauc[i]);
  }

  const double sqrt_wr = std::sqrt(p.weights.turning_radius);
  for (int i = 0; i < segs; ++i, ++row) {
    if (p.min_turn_radius <= 0.0) continue;
    const double q = 0.5 * wrap_angle(teb.poses[i + 1].theta - teb.poses[i].theta);
    const double sq = std::sin(q);
    if (std::abs(sq) < 1e-9) continue;  // straight joint, infinite radius
    const double abs_r = len[i] / (2.0 * std::abs(sq));
    const double h = p.min_turn_radius - abs_r;
    if (h <= 0.0) continue;
    out.residuals(row) = sqrt_wr * h;
    const double dr_dlen = 1.0 / (2.0 * std::abs(sq));
    const double dr_dq = -len[i] * std::cos(q) * (sq >= 0.0 ? 1.0 : -1.0) / (2.0 * sq * sq);
    if (len[i] > 1e-12) {
      const double ux = dx[i] / len[i], uy = dy[i] / len[i];
      put(row, pose_col(i, 0), sqrt_wr * dr_dlen * ux);
      put(row, pose_col(i + 1, 0), -sqrt_wr * dr_dlen * ux);
      put(row, pose_col(i, 1), sqrt_wr * dr_dlen * uy);
      put(row, pose_col(i + 1, 1), -sqrt_wr * dr_dlen * uy);
    }
    put(row, pose_col(i, 2), sqrt_wr * 0.5 * dr_dq);
    put(row, pose_col(i + 1, 2), -sqrt_wr * 0.5 * dr_dq);
  }

  const double sqrt_wa = std::sqrt(p.weights.acceleration);
  for (int i = 0; i + 1 < segs; ++i, ++row) {
    const double tbar = 0.5 * (tauc[i] + tauc[i + 1]);
    const double acc = (vel[i + 1] - vel[i]) / tbar;
    const double h = std::abs(acc) - p.max_accel;
    if (h <= 0.0) continue;
    out.residuals(row) = sqrt_wa * h;
    const double sgn = acc >= 0.0 ? 1.0 : -1.0;
    if (len[i + 1] > 1e-12) {
      const double gx = dx[i + 1] / (len[i + 1] * tauc[i + 1] * tbar);
      const double gy = dy[i + 1] / (len[i + 1] * tauc[i + 1] * tbar);
      put(row, pose_col(i + 1, 0), -sqrt_wa * sgn * gx);
      put(row, pose_col(i + 2, 0), sqrt_wa * sgn * gx);
      put(row, pose_col(i + 1, 1), -sqrt_wa * sgn * gy);
      put(row, pose_col(i + 2, 1), sqrt_wa * sgn * gy);
    }
    if (len[i] > 1e-12) {
      const double gx = dx[i] / (len[i] * tauc[i] * tbar);
      const double gy = dy[i] / (len[i] * tauc[i] * tbar);
      put(row, pose_col(i, 0), sqrt_wa * sgn * gx);
      put(row, pose_col(i + 1, 0), -sqrt_wa * sgn * gx);
      put(row, pose_col(i, 1), sqrt_wa * sgn * gy);
      put(row, pose_col(i + 1, 1), -sqrt_wa * sgn * gy);
    }
    if (tau_free[i]) {
      put(row, time_base + i,
          sqrt_wa * sgn * (vel[i] / (tauc[i] * tbar) - 0.5 * acc / tbar));
    }
    if (tau_free[i + 1]) {
      put(row, time_base + i + 1,
          sqrt_wa * sgn * (-vel[i + 1] / (tauc[i + 1] * tbar) - 0.5 * acc / tbar));
    }
  }

  const double sqrt_wo = std::sqrt(p.weights.obstacle);
  for (int k = 0; k < n; ++k, ++row) {
    if (obstacles.empty()) continue;
    double best = std::numeric_limits<double>::infinity();
    Vec2 nearest{};
    for (const auto& o : obstacles) {
      const double ox = teb.poses[k].x - o.x, oy = teb.poses[k].y - o.y;
      const double d2 = ox * ox + oy * oy;
      if (d2 < best) {
        best = d2;
        nearest = o;
      }
    }
    const double d = std::sqrt(best);
    const double h = p.min_obstacle_dist - d;
    if (h <= 0.0) continue;
    out.residuals(row) = sqrt_wo * h;
    if (d > 1e-12) {
      put(row, pose_col(k, 0), -sqrt_wo * (teb.poses[k].x - nearest.x) / d);
      put(row, pose_col(k, 1), -sqrt_wo * (teb.poses[k].y - nearest.y) / d);
    }
  }

  out.value = out.residuals.squaredNorm();
  return out;
}

// One insert/remove sweep; true when the band changed shape.
bool resize_band(TebTrajectory& teb, const TebParams& p) {
  bool changed = false;
  for (int i = 0; i + 1 < teb.size() && teb.size() < kMaxBandPoses; ++i) {
    const Pose2D& a = teb.poses[i];
    const Pose2D& b = teb.poses[i + 1];
    if (std::hypot(b.x - a.x, b.y - a.y) <= 2.0 * p.ref_resolution) continue;
    Pose2D mid;
    mid.x = 0.5 * (a.x + b.x);
    mid.y = 0.5 * (a.y + b.y);
    mid.theta = std::atan2(std::sin(a.theta) + std::sin(b.theta),
                           std::cos(a.theta) + std::cos(b.theta));
    const double half = std::max(0.5 * teb.time_diffs[i], kTebMinTimeDiff * (1.0 + 1e-9));
    teb.time_diffs[i] = half;
    teb.poses.insert(teb.poses.begin() + i + 1, mid);
    teb.time_diffs.insert(teb.time_diffs.begin() + i + 1, half);
    changed = true;
    ++i;  // the second half is at most ref_resolution over the limit, skip it
  }
  for (int i = 0; i + 1 < teb.size() && teb.size() > 2; ++i) {
    const Pose2D& a = teb.poses[i];
    const Pose2D& b = teb.poses[i + 1];
    if (std::hypot(b.x - a.x, b.y - a.y) >= 0.5 * p.ref_resolution) continue;
    const int victim = (i + 1 <= teb.size() - 2) ? i + 1 : i;
    if (victim <= 0 || victim >= teb.size() - 1) continue;
    teb.time_diffs[victim - 1] += teb.time_diffs[victim];
    teb.poses.erase(teb.poses.begin() + victim);
    teb.time_diffs.erase(teb.time_diffs.begin() + victim);
    changed = true;
    --i;
  }
  return changed;
}

}  // namespace

double TebTrajectory::total_time() const {
  double sum = 0.0;
  for (double dt : time_diffs) sum += dt;
  return sum;
}

void validate(const TebTrajectory& teb) {
  if (teb.poses.size() < 2) throw DomainError("trajectory needs at least two poses");
  if (teb.time_diffs.size() + 1 != teb.poses.size()) {
    throw DomainError("trajectory needs one time interval per segment");
  }
  for (const auto& pose : teb.poses) {
    if (!std::isfinite(pose.x) || !std::isfinite(pose.y) || !std::isfinite(pose.theta)) {
      throw DomainError("trajectory pose is not finite");
    }
  }
  for (double dt : teb.time_diffs) {
    if (!std::isfinite(dt) || dt < kTebMinTimeDiff) {
      throw DomainError("time interval below the floor");
    }
  }
}

void validate(const TebParams& params) {
  const double weights[] = {params.weights.time,         params.weights.obstacle,
                            params.weights.velocity,     params.weights.acceleration,
                            params.weights.kinematics,   params.weights.turning_radius};
  for (double w : weights) {
    if (!std::isfinite(w) || w < 0.0) throw ConfigError("objective weights must be >= 0");
  }
  if (!(params.min_obstacle_dist > 0.0)) throw ConfigError("min_obstacle_dist must be positive");
  if (!(params.max_vel > 0.0)) throw ConfigError("max_vel must be positive");
  if (!(params.max_accel > 0.0)) throw ConfigError("max_accel must be positive");
  if (!(params.min_turn_radius >= 0.0)) throw ConfigError("min_turn_radius must be >= 0");
  if (!(params.ref_resolution > 0.0)) throw ConfigError("ref_resolution must be positive");
}

TebTrajectory init_from_global(const GlobalPath& path, const TebParams& params) {
  validate(params);
  if (path.waypoints.empty()) throw DomainError("global path has no waypoints");

  std::vector<Vec2> pts;
  for (const auto& wp : path.waypoints) {
    if (pts.empty() || std::hypot(wp.x - pts.back().x, wp.y - pts.back().y) > 1e-12) {
      pts.push_back({wp.x, wp.y});
    }
  }
  const double goal_theta = path.waypoints.back().theta;

  TebTrajectory teb;
  if (pts.size() < 2) {
    const Pose2D pose{pts.front().x, pts.front().y, goal_theta};
    teb.poses = {pose, pose};
    teb.time_diffs = {kTebMinTimeDiff};
    return teb;
  }

  std::vector<double> cum{0.0};
  for (size_t j = 1; j < pts.size(); ++j) {
    cum.push_back(cum.back() + std::hypot(pts[j].x - pts[j - 1].x, pts[j].y - pts[j - 1].y));
  }
  const double total = cum.back();
  const int count = std::max(1, static_cast<int>(std::lround(total / params.ref_resolution)));

  std::vector<Vec2> samples(count + 1);
  size_t seg = 0;
  for (int j = 0; j <= count; ++j) {
    const double s = total * j / count;
    while (seg + 2 < pts.size() && cum[seg + 1] < s) ++seg;
    const double span = cum[seg + 1] - cum[seg];
    const double t = span > 0.0 ? (s - cum[seg]) / span : 0.0;
    samples[j] = {pts[seg].x + t * (pts[seg + 1].x - pts[seg].x),
                  pts[seg].y + t * (pts[seg + 1].y - pts[seg].y)};
  }

  teb.poses.resize(count + 1);
  teb.time_diffs.resize(count);
  for (int j = 0; j < count; ++j) {
    const double sx = samples[j + 1].x - samples[j].x;
    const double sy = samples[j + 1].y - samples[j].y;
    teb.poses[j] = {samples[j].x, samples[j].y, std::atan2(sy, sx)};
    teb.time_diffs[j] = std::max(std::hypot(sx, sy) / (0.8 * params.max_vel), kTebMinTimeDiff);
  }
  teb.poses[count] = {samples[count].x, samples[count].y, goal_theta};
  return teb;
}

TebObjective objective(const TebTrajectory& teb, const std::vector<Vec2>& obstacles,
                       const TebParams& params) {
  validate(teb);
  validate(params);
  Assembly a = assemble(teb, obstacles, params);
  TebObjective out;
  out.value = a.value;
  out.gradient = 2.0 * a.jacobian.transpose() * a.residuals;
  return out;
}

TebTrajectory optimize(const TebTrajectory& teb, const std::vector<Vec2>& obstacles,
                       const TebParams& params, int max_iters, TebTrace* trace) {
  validate(teb);
  validate(params);
  if (max_iters < 0) throw DomainError("max_iters must be >= 0");

  TebTrajectory cur = teb;
  Assembly cur_a = assemble(cur, obstacles, params);
  if (!std::isfinite(cur_a.value)) throw DomainError("objective not finite for input trajectory");
  if (trace) {
    trace->phases.clear();
    trace->phases.push_back({cur_a.value});
  }
  if (max_iters == 0) return cur;

  double lambda = 1e-3;
  double value = cur_a.value;

  for (int iter = 0; iter < max_iters; ++iter) {
    const int n = cur.size();
    const int segs = n - 1;
    const int vars = 3 * (n - 2) + segs;
    const int time_base = 3 * (n - 2);

    // Jacobian over log intervals: chain through d(tau)/d(log tau) = tau.
    Eigen::MatrixXd jac = cur_a.jacobian;
    for (int i = 0; i < segs; ++i) jac.col(time_base + i) *= cur.time_diffs[i];
    const Eigen::VectorXd grad = jac.transpose() * cur_a.residuals;
    if (grad.lpNorm<Eigen::Infinity>() < 1e-12) break;
    const Eigen::MatrixXd hess = jac.transpose() * jac;

    bool accepted = false;
    TebTrajectory cand;
    Assembly cand_a;
    for (int tries = 0; tries < 12 && !accepted; ++tries) {
      Eigen::MatrixXd damped = hess;
      for (int d = 0; d < vars; ++d) damped(d, d) += lambda * std::max(hess(d, d), 1e-9);
      const Eigen::VectorXd delta = damped.ldlt().solve(-grad);
      if (!delta.allFinite()) {
        lambda = std::min(lambda * 4.0, 1e12);
        continue;
      }
      cand = cur;
      for (int k = 1; k <= n - 2; ++k) {
        cand.poses[k].x += delta(3 * (k - 1));
        cand.poses[k].y += delta(3 * (k - 1) + 1);
        cand.poses[k].theta = wrap_angle(cand.poses[k].theta + delta(3 * (k - 1) + 2));
      }
      for (int i = 0; i < segs; ++i) {
        const double step = std::clamp(delta(time_base + i), -5.0, 5.0);
        cand.time_diffs[i] =
            std::max(cur.time_diffs[i] * std::exp(step), kTebMinTimeDiff * (1.0 + 1e-9));
      }
      cand_a = assemble(cand, obstacles, params);
      if (std::isfinite(cand_a.value) && cand_a.value < value) {
        accepted = true;
        lambda = std::max(lambda / 3.0, 1e-12);
      } else {
        lambda = std::min(lambda * 4.0, 1e12);
      }
    }
    if (!accepted) break;

    const double rel = (value - cand_a.value) / std::max(value, 1e-300);
    cur = std::move(cand);
    cur_a = std::move(cand_a);
    value = cur_a.value;
    if (trace) trace->phases.back().push_back(value);

    if (resize_band(cur, params)) {
      cur_a = assemble(cur, obstacles, params);
      value = cur_a.value;
      if (trace) trace->phases.push_back({value});
    } else if (rel < 1e-6) {
      break;
    }
  }
  return cur;
}

Twist2D command_from_teb(const TebTrajectory& teb) {
  validate(teb);
  const Pose2D& a = teb.poses[0];
  const Pose2D& b = teb.poses[1];
  const double tau = clamped_tau(teb.time_diffs[0]);
  const double dx = b.x - a.x, dy = b.y - a.y;
  double v = std::hypot(dx, dy) / tau;
  if (dx * std::cos(a.theta) + dy * std::sin(a.theta) < 0.0) v = -v;
  return {v, wrap_angle(b.theta - a.theta) / tau};
}

std::vector<Vec2> lethal_points_near(const Costmap& map, const std::vector<Pose2D>& band,
                                     double radius) {
  std::vector<Vec2> points;
  if (band.empty() || radius <= 0.0) return points;
  const double r2 = radius * radius;
  for (int row = 0; row < map.height; ++row) {
    for (int col = 0; col < map.width; ++col) {
      if (map.at({row, col}) != Costmap::kLethal) continue;
      const Vec2 center = map.cell_center({row, col});
      for (const auto& pose : band) {
        const double ox = center.x - pose.x, oy = center.y - pose.y;
        if (ox * ox + oy * oy <= r2) {
          points.push_back(center);
          break;
        }
      }
    }
  }
  return points;
}

}  // namespace navcore
