#ifndef NAVSIM_PIPELINE_HPP
#define NAVSIM_PIPELINE_HPP

#include <map>
#include <vector>

#include "navcore/grid.hpp"
#include "navcore/slam.hpp"
#include "navsim/runlog.hpp"
#include "navsim/scenario.hpp"

namespace navsim {

struct MappingResult {
  navcore::SlamResult slam;
  RunLog log;
};

// Drives the scripted mapping commands through the simulator, collecting one
// scan at the start pose and one after every control step, then builds the
// map from the whole stream. Throws CollisionError when the script hits
// anything; nothing is returned in that case.
MappingResult run_mapping(const Scenario& scenario);

// Live state captured for rendering, keyed by record index.
struct FrameOverlay {
  std::vector<navcore::Vec2> particles;
  std::vector<navcore::Pose2D> global_path;
  std::vector<navcore::Pose2D> band;
};

struct NavigationOptions {
  std::map<int, FrameOverlay>* overlays = nullptr;  // filled when non-null
  int overlay_every = 10;                           // record stride for overlays
};

// Localize, plan, and drive each mission goal in order. Unreachable goals are
// marked failed and skipped; a ground-truth collision aborts the run.
RunLog run_navigation(const Scenario& scenario, const navcore::OccupancyGrid& map,
                      const NavigationOptions& options = {});

}  // namespace navsim

#endif  // NAVSIM_PIPELINE_HPP
