#include "navcore/costmap.hpp"

#include <algorithm>
#include <cmath>

#include "navcore/errors.hpp"

namespace navcore {

GridIndex Costmap::cell_at(const Vec2& world) const {
  const double c = std::cos(origin.theta);
  const double s = std::sin(origin.theta);
  const double dx = world.x - origin.x;
  const double dy = world.y - origin.y;
  return {static_cast<int>(std::floor((-s * dx + c * dy) / resolution)),
          static_cast<int>(std::floor((c * dx + s * dy) / resolution))};
}

Vec2 Costmap::cell_center(const GridIndex& idx) const {
  const double c = std::cos(origin.theta);
  const double s = std::sin(origin.theta);
  const double gx = (idx.col + 0.5) * resolution;
  const double gy = (idx.row + 0.5) * resolution;
  return {origin.x + c * gx - s * gy, origin.y + s * gx + c * gy};
}

void validate(const InflationParams& params) {
  if (!(params.inscribed_radius > 0.0) ||
      !(params.circumscribed_radius >= params.inscribed_radius) ||
      !(params.inflation_radius >= params.circumscribed_radius)) {
    throw ConfigError("inflation radii must satisfy 0 < inscribed <= circumscribed <= inflation");
  }
  if (!(params.decay_weight > 0.0)) throw ConfigError("decay_weight must be positive");
}

Costmap build_costmap(const TriStateMap& map, const InflationParams& params) {
  validate(params);

  std::vector<uint8_t> occupied(map.cells.size());
  for (size_t i = 0; i < map.cells.size(); ++i) {
    occupied[i] = map.cells[i] == CellState::Occupied ? 1 : 0;
  }
  const DistanceField field =
      distance_transform(map.width, map.height, map.resolution, map.origin, occupied);

  Costmap out;
  out.width = map.width;
  out.height = map.height;
  out.resolution = map.resolution;
  out.origin = map.origin;
  out.cells.resize(map.cells.size());

  for (size_t i = 0; i < map.cells.size(); ++i) {
    if (map.cells[i] == CellState::Occupied) {
      out.cells[i] = Costmap::kLethal;
      continue;
    }
    if (map.cells[i] == CellState::Unknown) {
      out.cells[i] = Costmap::kUnknown;
      continue;
    }
    const double d = field.distances[i];
    if (d <= params.inscribed_radius) {
      out.cells[i] = Costmap::kInscribed;
    } else if (d <= params.inflation_radius) {
      const double decayed =
          252.0 * std::exp(-params.decay_weight * (d - params.inscribed_radius));
      const long v = std::lround(decayed);
      out.cells[i] = static_cast<uint8_t>(std::min(252L, std::max(1L, v)));
    } else {
      out.cells[i] = Costmap::kFree;
    }
  }
  return out;
}

Costmap build_costmap(const OccupancyGrid& grid, const InflationParams& params) {
  return build_costmap(to_tri_state(grid), params);
}

uint8_t cost_at(const Costmap& map, const Vec2& world) {
  const GridIndex idx = map.cell_at(world);
  if (!map.in_bounds(idx)) return Costmap::kLethal;
  return map.at(idx);
}

GridData encode_costmap(const Costmap& map) {
  GridData data;
  data.kind = "cost";
  data.width = map.width;
  data.height = map.height;
  data.resolution = map.resolution;
  data.origin_x = map.origin.x;
  data.origin_y = map.origin.y;
  data.origin_theta = map.origin.theta;
  data.values = map.cells;
  return data;
}

}  // namespace navcore
