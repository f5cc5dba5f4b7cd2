#ifndef NAVCORE_COSTMAP_HPP
#define NAVCORE_COSTMAP_HPP

#include <cstdint>
#include <vector>

#include "navcore/distance_transform.hpp"
#include "navcore/grid.hpp"

namespace navcore {

// 0-255 traversal cost grid. 0 = free, 253 = guaranteed collision band,
// 254 = obstacle cell, 255 = no information; inflated values occupy [1, 252].
struct Costmap {
  static constexpr uint8_t kFree = 0;
  static constexpr uint8_t kInscribed = 253;
  static constexpr uint8_t kLethal = 254;
  static constexpr uint8_t kUnknown = 255;

  int width = 0;
  int height = 0;
  double resolution = 0.05;
  Pose2D origin;
  std::vector<uint8_t> cells;

  uint8_t at(const GridIndex& idx) const {
    return cells[static_cast<size_t>(idx.row) * width + idx.col];
  }
  bool in_bounds(const GridIndex& idx) const {
    return idx.row >= 0 && idx.row < height && idx.col >= 0 && idx.col < width;
  }
  GridIndex cell_at(const Vec2& world) const;
  Vec2 cell_center(const GridIndex& idx) const;
};

struct InflationParams {
  double inscribed_radius = 0.15;
  double circumscribed_radius = 0.25;
  double inflation_radius = 0.8;
  double decay_weight = 5.0;  // 1/m
};

void validate(const InflationParams& params);

Costmap build_costmap(const TriStateMap& map, const InflationParams& params);
Costmap build_costmap(const OccupancyGrid& grid, const InflationParams& params);

// Cost of the containing cell; points outside the extent read as lethal.
uint8_t cost_at(const Costmap& map, const Vec2& world);

GridData encode_costmap(const Costmap& map);

}  // namespace navcore

#endif  // NAVCORE_COSTMAP_HPP
