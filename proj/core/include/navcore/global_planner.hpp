#ifndef NAVCORE_GLOBAL_PLANNER_HPP
#define NAVCORE_GLOBAL_PLANNER_HPP

#include <vector>

#include "navcore/costmap.hpp"
#include "navcore/types.hpp"

namespace navcore {

// Waypoints at cell centers; each theta points at the next waypoint, the
// last takes the goal heading. total_cost is in cell units.
struct GlobalPath {
  std::vector<Pose2D> waypoints;
  double total_cost = 0.0;
};

struct PlannerParams {
  double cost_scale = 3.0;  // weight of cell cost relative to distance
};

// Dijkstra over the 8-connected traversable cells (cost < 253). Edge cost is
// move_length * (1 + cost_scale * avg_endpoint_cost / 252) with move_length
// 1 or sqrt(2) cells. Diagonal steps may not cut between two blocked cells.
GlobalPath plan_global(const Costmap& map, const Pose2D& start, const Pose2D& goal,
                       const PlannerParams& params = {});

}  // namespace navcore

#endif  // NAVCORE_GLOBAL_PLANNER_HPP
