#include "navcore/global_planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <tuple>

#include "navcore/errors.hpp"

namespace navcore {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;

bool traversable(uint8_t cost) { return cost < Costmap::kInscribed; }

// Lethal or unknown cells physically block a diagonal from cutting the corner.
bool blocks_corner(uint8_t cost) { return cost >= Costmap::kLethal; }

struct QueueEntry {
  double cost;
  int row;
  int col;
  bool operator>(const QueueEntry& o) const {
    return std::tie(cost, row, col) > std::tie(o.cost, o.row, o.col);
  }
};

}  // namespace

GlobalPath plan_global(const Costmap& map, const Pose2D& start, const Pose2D& goal,
                       const PlannerParams& params) {
  const GridIndex start_cell = map.cell_at(start.position());
  const GridIndex goal_cell = map.cell_at(goal.position());
  if (!map.in_bounds(start_cell) || !traversable(map.at(start_cell))) {
    throw BlockedEndpointError("start cell is not traversable");
  }
  if (!map.in_bounds(goal_cell) || !traversable(map.at(goal_cell))) {
    throw BlockedEndpointError("goal cell is not traversable");
  }

  if (start_cell == goal_cell) {
    GlobalPath path;
    path.waypoints.push_back({goal.x, goal.y, goal.theta});
    path.total_cost = 0.0;
    return path;
  }

  const int width = map.width;
  const int height = map.height;
  auto flat = [width](int row, int col) { return static_cast<size_t>(row) * width + col; };

  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(static_cast<size_t>(width) * height, inf);
  std::vector<int32_t> pred(static_cast<size_t>(width) * height, -1);
  std::vector<uint8_t> done(static_cast<size_t>(width) * height, 0);

  std::priority_queue<QueueEntry, std::vector<QueueEntry>, std::greater<QueueEntry>> queue;
  dist[flat(start_cell.row, start_cell.col)] = 0.0;
  queue.push({0.0, start_cell.row, start_cell.col});

  static constexpr int kDr[8] = {-1, -1, -1, 0, 0, 1, 1, 1};
  static constexpr int kDc[8] = {-1, 0, 1, -1, 1, -1, 0, 1};

  while (!queue.empty()) {
    const QueueEntry top = queue.top();
    queue.pop();
    const size_t u = flat(top.row, top.col);
    if (done[u]) continue;  // lazy deletion
    done[u] = 1;
    if (top.row == goal_cell.row && top.col == goal_cell.col) break;

    const uint8_t u_cost = map.at({top.row, top.col});
    for (int k = 0; k < 8; ++k) {
      const int nr = top.row + kDr[k];
      const int nc = top.col + kDc[k];
      if (nr < 0 || nr >= height || nc < 0 || nc >= width) continue;
      const uint8_t v_cost = map.at({nr, nc});
      if (!traversable(v_cost)) continue;
      const bool diagonal = kDr[k] != 0 && kDc[k] != 0;
      if (diagonal) {
        const uint8_t cut_a = map.at({top.row, nc});
        const uint8_t cut_b = map.at({nr, top.col});
        if (blocks_corner(cut_a) && blocks_corner(cut_b)) continue;
      }
      const double move = diagonal ? kSqrt2 : 1.0;
      const double avg = 0.5 * (static_cast<double>(u_cost) + v_cost);
      const double w = move * (1.0 + params.cost_scale * avg / 252.0);
      const size_t v = flat(nr, nc);
      const double candidate = dist[u] + w;
      if (candidate < dist[v]) {
        dist[v] = candidate;
        pred[v] = static_cast<int32_t>(u);
        queue.push({candidate, nr, nc});
      } else if (candidate == dist[v] && pred[v] >= 0 &&
                 static_cast<int32_t>(u) < pred[v]) {
        pred[v] = static_cast<int32_t>(u);  // deterministic tie-break
      }
    }
  }

  const size_t goal_flat = flat(goal_cell.row, goal_cell.col);
  if (dist[goal_flat] == inf) throw NoPathError("no traversable route to goal");

  std::vector<GridIndex> cells;
  for (int32_t at = static_cast<int32_t>(goal_flat); at >= 0; at = pred[at]) {
    cells.push_back({at / width, at % width});
    if (cells.back() == start_cell) break;
  }
  std::reverse(cells.begin(), cells.end());

  GlobalPath path;
  path.total_cost = dist[goal_flat];
  path.waypoints.reserve(cells.size());
  for (size_t i = 0; i < cells.size(); ++i) {
    const Vec2 c = map.cell_center(cells[i]);
    double theta = goal.theta;
    if (i + 1 < cells.size()) {
      const Vec2 n = map.cell_center(cells[i + 1]);
      theta = std::atan2(n.y - c.y, n.x - c.x);
    }
    path.waypoints.push_back({c.x, c.y, theta});
  }
  return path;
}

}  // namespace navcore
