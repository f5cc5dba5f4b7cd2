#ifndef NAVCORE_ERRORS_HPP
#define NAVCORE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace navcore {

struct NavError : std::runtime_error {
  explicit NavError(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid input values (non-finite numbers, out-of-range arguments).
struct DomainError : NavError {
  using NavError::NavError;
};

// Invalid or inconsistent configuration (parameter invariants violated).
struct ConfigError : NavError {
  using NavError::NavError;
};

// Sensor pose lies inside an obstacle or outside the world bounds.
struct EmbeddedPoseError : NavError {
  using NavError::NavError;
};

// Scan has too few usable returns to match.
struct DegenerateScanError : NavError {
  using NavError::NavError;
};

// Query point outside a grid's valid region.
struct OutOfBoundsError : NavError {
  using NavError::NavError;
};

// Planner start or goal cell is not traversable.
struct BlockedEndpointError : NavError {
  using NavError::NavError;
};

// No connected route between start and goal.
struct NoPathError : NavError {
  using NavError::NavError;
};

// Vehicle footprint intersected an obstacle during simulation.
struct CollisionError : NavError {
  using NavError::NavError;
};

// File could not be read, written, or parsed.
struct IoError : NavError {
  using NavError::NavError;
};

}  // namespace navcore

#endif  // NAVCORE_ERRORS_HPP
