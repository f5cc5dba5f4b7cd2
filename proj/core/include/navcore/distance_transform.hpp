#ifndef NAVCORE_DISTANCE_TRANSFORM_HPP
#define NAVCORE_DISTANCE_TRANSFORM_HPP

#include <cstdint>
#include <vector>

#include "navcore/types.hpp"

namespace navcore {

// Distance-to-nearest-obstacle field in meters, row-major, same cell layout
// as the grid it was built from.
struct DistanceField {
  int width = 0;
  int height = 0;
  double resolution = 0.05;
  Pose2D origin;
  std::vector<double> distances;

  double at(int row, int col) const { return distances[static_cast<size_t>(row) * width + col]; }

  // Nearest-cell lookup; +inf outside the field.
  double sample(const Vec2& world) const;
};

// Two-pass 3-4 chamfer approximation of the Euclidean distance to the nearest
// set cell of the mask (nonzero = obstacle). Obstacle cells read 0; a mask with
// no obstacles reads +inf everywhere.
DistanceField distance_transform(int width, int height, double resolution,
                                 const Pose2D& origin, const std::vector<uint8_t>& mask);

}  // namespace navcore

#endif  // NAVCORE_DISTANCE_TRANSFORM_HPP
