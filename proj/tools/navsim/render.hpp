#ifndef NAVSIM_RENDER_HPP
#define NAVSIM_RENDER_HPP

#include <map>
#include <string>
#include <vector>

#include "navcore/grid.hpp"
#include "navsim/pipeline.hpp"
#include "navsim/runlog.hpp"

namespace navsim {

// Writes one SVG frame per every_n-th record (indices 0, every_n, 2*every_n,
// ...) into out_dir: map cells, trajectories up to that record, pose markers,
// and any overlay captured for that record index. Returns the file paths in
// frame order.
std::vector<std::string> render_frames(const RunLog& log, const navcore::OccupancyGrid& map,
                                       const std::string& out_dir, int every_n,
                                       const std::map<int, FrameOverlay>* overlays = nullptr);

}  // namespace navsim

#endif  // NAVSIM_RENDER_HPP
