#ifndef NAVCORE_GRID_HPP
#define NAVCORE_GRID_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "navcore/types.hpp"
#include "navcore/world.hpp"

namespace navcore {

struct GridIndex {
  int row = 0;
  int col = 0;
  bool operator==(const GridIndex&) const = default;
};

// Row-major log-odds occupancy map. Cell (row, col) covers the square whose
// lower-left corner sits at origin + (col, row) * resolution; row 0 is the
// bottom row. origin.theta rotates the whole grid (zero in practice).
class OccupancyGrid {
 public:
  static constexpr double kLogOddsMin = -4.0;
  static constexpr double kLogOddsMax = 4.0;

  OccupancyGrid() = default;
  OccupancyGrid(int width, int height, double resolution, const Pose2D& origin);

  int width() const { return width_; }
  int height() const { return height_; }
  double resolution() const { return resolution_; }
  const Pose2D& origin() const { return origin_; }

  bool in_bounds(const GridIndex& idx) const {
    return idx.row >= 0 && idx.row < height_ && idx.col >= 0 && idx.col < width_;
  }
  double log_odds(const GridIndex& idx) const { return cells_[idx.row * width_ + idx.col]; }
  double probability(const GridIndex& idx) const;
  bool observed(const GridIndex& idx) const {
    return observed_[idx.row * width_ + idx.col] != 0;
  }

  // Adds delta to the cell's log-odds, clamps, and marks it observed.
  void update(const GridIndex& idx, double delta);

  // Continuous grid coordinates (units of cells) of a world point; cell
  // (row, col) spans [col, col+1) x [row, row+1).
  Vec2 to_grid_frame(const Vec2& world) const;
  Vec2 to_world_frame(const Vec2& grid) const;

  GridIndex cell_at(const Vec2& world) const;
  Vec2 cell_center(const GridIndex& idx) const;

  // True where bilinear interpolation is defined (half-cell interior margin).
  bool in_interior(const Vec2& world) const;

 private:
  int width_ = 0;
  int height_ = 0;
  double resolution_ = 0.05;
  Pose2D origin_;
  std::vector<double> cells_;
  std::vector<uint8_t> observed_;
};

// Grid sized to cover the bounds plus margin on every side, origin at the
// lower-left corner, axis-aligned.
OccupancyGrid grid_for_bounds(const Aabb& bounds, double resolution, double margin);

// Every cell the segment from a to b (world coordinates) passes through, in
// order, clipped to the grid. Includes the start and end cells.
std::vector<GridIndex> traverse_cells(const OccupancyGrid& grid, const Vec2& a,
                                      const Vec2& b);

struct Interpolation {
  double value = 0.5;
  Vec2 gradient{0.0, 0.0};  // d(value)/d(world meters)
};

// Bilinear interpolation of occupancy probability between the four nearest
// cell centers. Requires a half-cell interior margin.
Interpolation interpolate(const OccupancyGrid& grid, const Vec2& point);

// Distance along the ray to the boundary of the first cell whose occupancy
// probability exceeds occupied_threshold, capped at max_range. The cell
// containing the origin is skipped.
double grid_raycast(const OccupancyGrid& grid, const Vec2& origin, double angle,
                    double max_range, double occupied_threshold = 0.65);

enum class CellState : uint8_t { Free = 0, Occupied = 1, Unknown = 2 };

struct TriStateMap {
  int width = 0;
  int height = 0;
  double resolution = 0.05;
  Pose2D origin;
  std::vector<CellState> cells;

  CellState at(const GridIndex& idx) const { return cells[idx.row * width + idx.col]; }
};

// Occupied above p > 0.65, free below p < 0.25, otherwise unknown;
// never-observed cells are unknown regardless of probability.
TriStateMap to_tri_state(const OccupancyGrid& grid);

// Raw 0-255 grid as stored on disk.
struct GridData {
  std::string kind;  // "occupancy" or "cost"
  int width = 0;
  int height = 0;
  double resolution = 0.05;
  double origin_x = 0.0;
  double origin_y = 0.0;
  double origin_theta = 0.0;
  std::vector<uint8_t> values;
};

// Occupancy file encoding: round(254 * p_occ), 255 for never-observed cells.
GridData encode_occupancy(const OccupancyGrid& grid);
OccupancyGrid decode_occupancy(const GridData& data);
TriStateMap tri_state_from_data(const GridData& data);

std::string serialize_grid(const GridData& data);
GridData parse_grid(const std::string& text);

void save_grid(const GridData& data, const std::string& path);
GridData load_grid(const std::string& path);

}  // namespace navcore

#endif  // NAVCORE_GRID_HPP
