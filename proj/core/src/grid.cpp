#include "navcore/grid.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "navcore/errors.hpp"

namespace navcore {

namespace {

double sigmoid(double l) { return 1.0 / (1.0 + std::exp(-l)); }

double logit(double p) {
  if (p <= 0.0) return OccupancyGrid::kLogOddsMin;
  if (p >= 1.0) return OccupancyGrid::kLogOddsMax;
  return std::log(p / (1.0 - p));
}

double clamp_log_odds(double l) {
  if (l < OccupancyGrid::kLogOddsMin) return OccupancyGrid::kLogOddsMin;
  if (l > OccupancyGrid::kLogOddsMax) return OccupancyGrid::kLogOddsMax;
  return l;
}

// %.9g round-trips doubles used here and keeps files byte-stable.
std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

}  // namespace

OccupancyGrid::OccupancyGrid(int width, int height, double resolution, const Pose2D& origin)
    : width_(width), height_(height), resolution_(resolution), origin_(origin) {
  if (width <= 0 || height <= 0) throw ConfigError("grid dimensions must be positive");
  if (!(resolution > 0.0)) throw ConfigError("grid resolution must be positive");
  cells_.assign(static_cast<size_t>(width) * height, 0.0);
  observed_.assign(static_cast<size_t>(width) * height, 0);
}

double OccupancyGrid::probability(const GridIndex& idx) const {
  return sigmoid(log_odds(idx));
}

void OccupancyGrid::update(const GridIndex& idx, double delta) {
  const size_t i = static_cast<size_t>(idx.row) * width_ + idx.col;
  cells_[i] = clamp_log_odds(cells_[i] + delta);
  observed_[i] = 1;
}

Vec2 OccupancyGrid::to_grid_frame(const Vec2& world) const {
  const double c = std::cos(origin_.theta);
  const double s = std::sin(origin_.theta);
  const double dx = world.x - origin_.x;
  const double dy = world.y - origin_.y;
  return {(c * dx + s * dy) / resolution_, (-s * dx + c * dy) / resolution_};
}

Vec2 OccupancyGrid::to_world_frame(const Vec2& grid) const {
  const double c = std::cos(origin_.theta);
  const double s = std::sin(origin_.theta);
  const double gx = grid.x * resolution_;
  const double gy = grid.y * resolution_;
  return {origin_.x + c * gx - s * gy, origin_.y + s * gx + c * gy};
}

GridIndex OccupancyGrid::cell_at(const Vec2& world) const {
  const Vec2 g = to_grid_frame(world);
  return {static_cast<int>(std::floor(g.y)), static_cast<int>(std::floor(g.x))};
}

Vec2 OccupancyGrid::cell_center(const GridIndex& idx) const {
  return to_world_frame({idx.col + 0.5, idx.row + 0.5});
}

bool OccupancyGrid::in_interior(const Vec2& world) const {
  const Vec2 g = to_grid_frame(world);
  const int c0 = static_cast<int>(std::floor(g.x - 0.5));
  const int r0 = static_cast<int>(std::floor(g.y - 0.5));
  return c0 >= 0 && r0 >= 0 && c0 + 1 < width_ && r0 + 1 < height_;
}

OccupancyGrid grid_for_bounds(const Aabb& bounds, double resolution, double margin) {
  const double x0 = bounds.x_min - margin;
  const double y0 = bounds.y_min - margin;
  const int width = static_cast<int>(std::ceil((bounds.width() + 2.0 * margin) / resolution));
  const int height =
      static_cast<int>(std::ceil((bounds.height() + 2.0 * margin) / resolution));
  return OccupancyGrid(width, height, resolution, {x0, y0, 0.0});
}

std::vector<GridIndex> traverse_cells(const OccupancyGrid& grid, const Vec2& a,
                                      const Vec2& b) {
  const Vec2 ga = grid.to_grid_frame(a);
  const Vec2 gb = grid.to_grid_frame(b);
  const double dx = gb.x - ga.x;
  const double dy = gb.y - ga.y;

  int col = static_cast<int>(std::floor(ga.x));
  int row = static_cast<int>(std::floor(ga.y));
  const int end_col = static_cast<int>(std::floor(gb.x));
  const int end_row = static_cast<int>(std::floor(gb.y));

  const int step_col = (dx > 0.0) - (dx < 0.0);
  const int step_row = (dy > 0.0) - (dy < 0.0);

  const double inf = std::numeric_limits<double>::infinity();
  double t_max_x = inf, t_max_y = inf, t_delta_x = inf, t_delta_y = inf;
  if (dx != 0.0) {
    const double next = (step_col > 0) ? (col + 1.0 - ga.x) : (ga.x - col);
    t_max_x = next / std::abs(dx);
    t_delta_x = 1.0 / std::abs(dx);
  }
  if (dy != 0.0) {
    const double next = (step_row > 0) ? (row + 1.0 - ga.y) : (ga.y - row);
    t_max_y = next / std::abs(dy);
    t_delta_y = 1.0 / std::abs(dy);
  }

  std::vector<GridIndex> out;
  const int guard = grid.width() + grid.height() + 4;
  for (int i = 0; i < guard; ++i) {
    const GridIndex idx{row, col};
    if (grid.in_bounds(idx)) out.push_back(idx);
    if (row == end_row && col == end_col) break;
    if (t_max_x > 1.0 && t_max_y > 1.0) break;  // numeric safety near the endpoint
    if (t_max_x < t_max_y) {
      col += step_col;
      t_max_x += t_delta_x;
    } else {
      row += step_row;
      t_max_y += t_delta_y;
    }
  }
  return out;
}

Interpolation interpolate(const OccupancyGrid& grid, const Vec2& point) {
  const Vec2 g = grid.to_grid_frame(point);
  const double u = g.x - 0.5;  // integer coordinates at cell centers
  const double v = g.y - 0.5;
  const int c0 = static_cast<int>(std::floor(u));
  const int r0 = static_cast<int>(std::floor(v));
  if (c0 < 0 || r0 < 0 || c0 + 1 >= grid.width() || r0 + 1 >= grid.height()) {
    throw OutOfBoundsError("interpolation point outside grid interior");
  }
  const double fu = u - c0;
  const double fv = v - r0;
  const double p00 = grid.probability({r0, c0});
  const double p10 = grid.probability({r0, c0 + 1});
  const double p01 = grid.probability({r0 + 1, c0});
  const double p11 = grid.probability({r0 + 1, c0 + 1});

  Interpolation out;
  out.value = (1.0 - fu) * (1.0 - fv) * p00 + fu * (1.0 - fv) * p10 +
              (1.0 - fu) * fv * p01 + fu * fv * p11;

  const double du = ((1.0 - fv) * (p10 - p00) + fv * (p11 - p01)) / grid.resolution();
  const double dv = ((1.0 - fu) * (p01 - p00) + fu * (p11 - p10)) / grid.resolution();
  const double c = std::cos(grid.origin().theta);
  const double s = std::sin(grid.origin().theta);
  out.gradient = {c * du - s * dv, s * du + c * dv};
  return out;
}

double grid_raycast(const OccupancyGrid& grid, const Vec2& origin, double angle,
                    double max_range, double occupied_threshold) {
  const Vec2 end{origin.x + max_range * std::cos(angle),
                 origin.y + max_range * std::sin(angle)};
  const Vec2 ga = grid.to_grid_frame(origin);
  const Vec2 gb = grid.to_grid_frame(end);
  const double dx = gb.x - ga.x;
  const double dy = gb.y - ga.y;

  int col = static_cast<int>(std::floor(ga.x));
  int row = static_cast<int>(std::floor(ga.y));
  const int start_col = col, start_row = row;
  const int end_col = static_cast<int>(std::floor(gb.x));
  const int end_row = static_cast<int>(std::floor(gb.y));

  const int step_col = (dx > 0.0) - (dx < 0.0);
  const int step_row = (dy > 0.0) - (dy < 0.0);

  const double inf = std::numeric_limits<double>::infinity();
  double t_max_x = inf, t_max_y = inf, t_delta_x = inf, t_delta_y = inf;
  if (dx != 0.0) {
    const double next = (step_col > 0) ? (col + 1.0 - ga.x) : (ga.x - col);
    t_max_x = next / std::abs(dx);
    t_delta_x = 1.0 / std::abs(dx);
  }
  if (dy != 0.0) {
    const double next = (step_row > 0) ? (row + 1.0 - ga.y) : (ga.y - row);
    t_max_y = next / std::abs(dy);
    t_delta_y = 1.0 / std::abs(dy);
  }

  double entry_t = 0.0;
  const int guard = grid.width() + grid.height() + 4;
  for (int i = 0; i < guard; ++i) {
    const GridIndex idx{row, col};
    const bool is_start = (row == start_row && col == start_col);
    if (!is_start && grid.in_bounds(idx) &&
        grid.probability(idx) > occupied_threshold) {
      return entry_t * max_range;
    }
    if (row == end_row && col == end_col) break;
    if (t_max_x > 1.0 && t_max_y > 1.0) break;
    if (t_max_x < t_max_y) {
      entry_t = t_max_x;
      col += step_col;
      t_max_x += t_delta_x;
    } else {
      entry_t = t_max_y;
      row += step_row;
      t_max_y += t_delta_y;
    }
  }
  return max_range;
}

TriStateMap to_tri_state(const OccupancyGrid& grid) {
  TriStateMap map;
  map.width = grid.width();
  map.height = grid.height();
  map.resolution = grid.resolution();
  map.origin = grid.origin();
  map.cells.resize(static_cast<size_t>(map.width) * map.height);
  for (int row = 0; row < map.height; ++row) {
    for (int col = 0; col < map.width; ++col) {
      const GridIndex idx{row, col};
      CellState state = CellState::Unknown;
      if (grid.observed(idx)) {
        const double p = grid.probability(idx);
        if (p > 0.65) {
          state = CellState::Occupied;
        } else if (p < 0.25) {
          state = CellState::Free;
        }
      }
      map.cells[static_cast<size_t>(row) * map.width + col] = state;
    }
  }
  return map;
}

GridData encode_occupancy(const OccupancyGrid& grid) {
  GridData data;
  data.kind = "occupancy";
  data.width = grid.width();
  data.height = grid.height();
  data.resolution = grid.resolution();
  data.origin_x = grid.origin().x;
  data.origin_y = grid.origin().y;
  data.origin_theta = grid.origin().theta;
  data.values.resize(static_cast<size_t>(data.width) * data.height);
  for (int row = 0; row < data.height; ++row) {
    for (int col = 0; col < data.width; ++col) {
      const GridIndex idx{row, col};
      uint8_t v = 255;
      if (grid.observed(idx)) {
        v = static_cast<uint8_t>(std::lround(254.0 * grid.probability(idx)));
      }
      data.values[static_cast<size_t>(row) * data.width + col] = v;
    }
  }
  return data;
}

OccupancyGrid decode_occupancy(const GridData& data) {
  if (data.kind != "occupancy") throw ConfigError("grid file is not an occupancy map");
  OccupancyGrid grid(data.width, data.height, data.resolution,
                     {data.origin_x, data.origin_y, data.origin_theta});
  for (int row = 0; row < data.height; ++row) {
    for (int col = 0; col < data.width; ++col) {
      const uint8_t v = data.values[static_cast<size_t>(row) * data.width + col];
      if (v == 255) continue;  // unknown stays unobserved
      grid.update({row, col}, clamp_log_odds(logit(v / 254.0)));
    }
  }
  return grid;
}

TriStateMap tri_state_from_data(const GridData& data) {
  if (data.kind != "occupancy") throw ConfigError("grid file is not an occupancy map");
  TriStateMap map;
  map.width = data.width;
  map.height = data.height;
  map.resolution = data.resolution;
  map.origin = {data.origin_x, data.origin_y, data.origin_theta};
  map.cells.resize(data.values.size());
  for (size_t i = 0; i < data.values.size(); ++i) {
    const uint8_t v = data.values[i];
    CellState state = CellState::Unknown;
    if (v != 255) {
      const double p = v / 254.0;
      if (p > 0.65) {
        state = CellState::Occupied;
      } else if (p < 0.25) {
        state = CellState::Free;
      }
    }
    map.cells[i] = state;
  }
  return map;
}

std::string serialize_grid(const GridData& data) {
  if (data.kind != "occupancy" && data.kind != "cost") {
    throw IoError("grid kind must be occupancy or cost");
  }
  if (data.width <= 0 || data.height <= 0 ||
      data.values.size() != static_cast<size_t>(data.width) * data.height) {
    throw IoError("grid dimensions do not match cell count");
  }
  std::string out;
  out.reserve(data.values.size() * 4 + 128);
  out += "NAVGRID 1 " + data.kind + "\n";
  out += std::to_string(data.width) + " " + std::to_string(data.height) + "\n";
  out += format_double(data.resolution) + "\n";
  out += format_double(data.origin_x) + " " + format_double(data.origin_y) + " " +
         format_double(data.origin_theta) + "\n";
  for (int row = 0; row < data.height; ++row) {
    for (int col = 0; col < data.width; ++col) {
      if (col > 0) out += ' ';
      out += std::to_string(data.values[static_cast<size_t>(row) * data.width + col]);
    }
    out += '\n';
  }
  return out;
}

GridData parse_grid(const std::string& text) {
  std::istringstream in(text);
  std::string magic, kind;
  int version = 0;
  if (!(in >> magic >> version >> kind) || magic != "NAVGRID") {
    throw IoError("not a NAVGRID file");
  }
  if (version != 1) throw IoError("unsupported NAVGRID version");
  if (kind != "occupancy" && kind != "cost") throw IoError("unknown grid kind");

  GridData data;
  data.kind = kind;
  if (!(in >> data.width >> data.height) || data.width <= 0 || data.height <= 0) {
    throw IoError("bad grid dimensions");
  }
  if (!(in >> data.resolution) || !(data.resolution > 0.0)) {
    throw IoError("bad grid resolution");
  }
  if (!(in >> data.origin_x >> data.origin_y >> data.origin_theta)) {
    throw IoError("bad grid origin");
  }
  const size_t count = static_cast<size_t>(data.width) * data.height;
  data.values.resize(count);
  for (size_t i = 0; i < count; ++i) {
    int v;
    if (!(in >> v) || v < 0 || v > 255) throw IoError("bad grid cell value");
    data.values[i] = static_cast<uint8_t>(v);
  }
  int extra;
  if (in >> extra) throw IoError("trailing data after grid cells");
  return data;
}

void save_grid(const GridData& data, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  const std::string text = serialize_grid(data);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("failed writing " + path);
}

GridData load_grid(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_grid(buf.str());
}

}  // namespace navcore
