#include "navsim/render.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "navcore/errors.hpp"

namespace navsim {

using namespace navcore;

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

void emit_rect(std::ostringstream& out, double x, double y, double w, double h,
               const char* fill) {
  out << "<rect x=\"" << num(x) << "\" y=\"" << num(y) << "\" width=\"" << num(w)
      << "\" height=\"" << num(h) << "\" fill=\"" << fill << "\"/>\n";
}

// Merges horizontal runs of same-state cells into single rects.
void emit_cells(std::ostringstream& out, const TriStateMap& tri, CellState state,
                const char* fill) {
  for (int row = 0; row < tri.height; ++row) {
    int col = 0;
    while (col < tri.width) {
      if (tri.at({row, col}) != state) {
        ++col;
        continue;
      }
      int run = col;
      while (run < tri.width && tri.at({row, run}) == state) ++run;
      emit_rect(out, tri.origin.x + col * tri.resolution,
                tri.origin.y + row * tri.resolution, (run - col) * tri.resolution,
                tri.resolution, fill);
      col = run;
    }
  }
}

template <typename GetPose>
void emit_polyline(std::ostringstream& out, size_t count, GetPose get,
                   const char* stroke, double width) {
  if (count < 2) return;
  out << "<polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\""
      << num(width) << "\" points=\"";
  for (size_t i = 0; i < count; ++i) {
    const Pose2D p = get(i);
    if (i) out << ' ';
    out << num(p.x) << ',' << num(p.y);
  }
  out << "\"/>\n";
}

void emit_pose_marker(std::ostringstream& out, const Pose2D& pose, const char* stroke) {
  out << "<circle cx=\"" << num(pose.x) << "\" cy=\"" << num(pose.y)
      << "\" r=\"0.08\" fill=\"none\" stroke=\"" << stroke
      << "\" stroke-width=\"0.03\"/>\n";
  out << "<line x1=\"" << num(pose.x) << "\" y1=\"" << num(pose.y) << "\" x2=\""
      << num(pose.x + 0.18 * std::cos(pose.theta)) << "\" y2=\""
      << num(pose.y + 0.18 * std::sin(pose.theta)) << "\" stroke=\"" << stroke
      << "\" stroke-width=\"0.03\"/>\n";
}

}  // namespace

std::vector<std::string> render_frames(const RunLog& log, const OccupancyGrid& map,
                                       const std::string& out_dir, int every_n,
                                       const std::map<int, FrameOverlay>* overlays) {
  if (every_n < 1) throw ConfigError("render stride must be >= 1");
  if (log.records.empty()) throw DomainError("cannot render an empty log");

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);

  const TriStateMap tri = to_tri_state(map);
  const double world_w = map.width() * map.resolution();
  const double world_h = map.height() * map.resolution();
  const int px_w = 800;
  const int px_h = std::max(1, static_cast<int>(std::lround(800.0 * world_h / world_w)));

  std::vector<std::string> paths;
  for (size_t idx = 0; idx < log.records.size(); idx += every_n) {
    std::ostringstream svg;
    svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << px_w
        << "\" height=\"" << px_h << "\" viewBox=\"" << num(map.origin().x) << ' '
        << num(-(map.origin().y + world_h)) << ' ' << num(world_w) << ' '
        << num(world_h) << "\">\n";
    // World coordinates drawn directly; the flip makes y point up on screen.
    svg << "<g transform=\"scale(1,-1)\">\n";
    emit_rect(svg, map.origin().x, map.origin().y, world_w, world_h, "#ffffff");
    emit_cells(svg, tri, CellState::Unknown, "#d4d4d4");
    emit_cells(svg, tri, CellState::Occupied, "#303030");

    if (overlays) {
      const auto it = overlays->find(static_cast<int>(idx));
      if (it != overlays->end()) {
        const FrameOverlay& ov = it->second;
        for (const Vec2& p : ov.particles) {
          svg << "<circle cx=\"" << num(p.x) << "\" cy=\"" << num(p.y)
              << "\" r=\"0.02\" fill=\"#9a5bd4\"/>\n";
        }
        emit_polyline(
            svg, ov.global_path.size(), [&](size_t i) { return ov.global_path[i]; },
            "#2060d0", 0.03);
        emit_polyline(
            svg, ov.band.size(), [&](size_t i) { return ov.band[i]; }, "#e08020", 0.04);
      }
    }

    emit_polyline(
        svg, idx + 1, [&](size_t i) { return log.records[i].ground_truth; }, "#2a9d2a",
        0.025);
    emit_polyline(
        svg, idx + 1, [&](size_t i) { return log.records[i].estimate; }, "#d03030",
        0.025);
    emit_pose_marker(svg, log.records[idx].ground_truth, "#2a9d2a");
    emit_pose_marker(svg, log.records[idx].estimate, "#d03030");

    svg << "</g>\n</svg>\n";

    char name[32];
    std::snprintf(name, sizeof name, "frame_%06zu.svg", idx);
    const std::string path = (std::filesystem::path(out_dir) / name).string();
    std::ofstream file(path, std::ios::binary);
    if (!file) throw IoError("cannot write frame file: " + path);
    file << svg.str();
    if (!file) throw IoError("short write on frame file: " + path);
    paths.push_back(path);
  }
  return paths;
}

}  // namespace navsim
