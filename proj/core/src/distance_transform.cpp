#include "navcore/distance_transform.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "navcore/errors.hpp"

namespace navcore {

double DistanceField::sample(const Vec2& world) const {
  const double c = std::cos(origin.theta);
  const double s = std::sin(origin.theta);
  const double dx = world.x - origin.x;
  const double dy = world.y - origin.y;
  const int col = static_cast<int>(std::floor((c * dx + s * dy) / resolution));
  const int row = static_cast<int>(std::floor((-s * dx + c * dy) / resolution));
  if (row < 0 || row >= height || col < 0 || col >= width) {
    return std::numeric_limits<double>::infinity();
  }
  return at(row, col);
}

DistanceField distance_transform(int width, int height, double resolution,
                                 const Pose2D& origin, const std::vector<uint8_t>& mask) {
  if (width <= 0 || height <= 0 || !(resolution > 0.0)) {
    throw ConfigError("distance transform needs a positive grid");
  }
  if (mask.size() != static_cast<size_t>(width) * height) {
    throw ConfigError("mask size does not match grid dimensions");
  }

  // Integer chamfer weights 3 (edge) and 4 (diagonal); true distance is the
  // accumulated weight * resolution / 3.
  const int64_t kInf = std::numeric_limits<int64_t>::max() / 4;
  std::vector<int64_t> d(mask.size());
  for (size_t i = 0; i < mask.size(); ++i) d[i] = mask[i] ? 0 : kInf;

  auto idx = [width](int row, int col) { return static_cast<size_t>(row) * width + col; };

  // Forward pass: top-left to bottom-right.
  for (int row = 0; row < height; ++row) {
    for (int col = 0; col < width; ++col) {
      int64_t best = d[idx(row, col)];
      if (col > 0) best = std::min(best, d[idx(row, col - 1)] + 3);
      if (row > 0) {
        best = std::min(best, d[idx(row - 1, col)] + 3);
        if (col > 0) best = std::min(best, d[idx(row - 1, col - 1)] + 4);
        if (col + 1 < width) best = std::min(best, d[idx(row - 1, col + 1)] + 4);
      }
      d[idx(row, col)] = best;
    }
  }
  // Backward pass: bottom-right to top-left.
  for (int row = height - 1; row >= 0; --row) {
    for (int col = width - 1; col >= 0; --col) {
      int64_t best = d[idx(row, col)];
      if (col + 1 < width) best = std::min(best, d[idx(row, col + 1)] + 3);
      if (row + 1 < height) {
        best = std::min(best, d[idx(row + 1, col)] + 3);
        if (col + 1 < width) best = std::min(best, d[idx(row + 1, col + 1)] + 4);
        if (col > 0) best = std::min(best, d[idx(row + 1, col - 1)] + 4);
      }
      d[idx(row, col)] = best;
    }
  }

  DistanceField field;
  field.width = width;
  field.height = height;
  field.resolution = resolution;
  field.origin = origin;
  field.distances.resize(mask.size());
  const double scale = resolution / 3.0;
  for (size_t i = 0; i < mask.size(); ++i) {
    field.distances[i] = (d[i] >= kInf) ? std::numeric_limits<double>::infinity()
                                        : static_cast<double>(d[i]) * scale;
  }
  return field;
}

}  // namespace navcore
