#include "navcore/costmap.hpp"

#include <cmath>

#include "doctest.h"
#include "navcore/errors.hpp"
#include "navcore/random.hpp"
#include "support/oracles.hpp"

using namespace navcore;

namespace {

TriStateMap blank_map(int width, int height, double resolution = 0.1) {
  TriStateMap map;
  map.width = width;
  map.height = height;
  map.resolution = resolution;
  map.origin = {0.0, 0.0, 0.0};
  map.cells.assign(static_cast<size_t>(width) * height, CellState::Free);
  return map;
}

}  // namespace

TEST_CASE("chamfer distance matches hand values on tiny masks") {
  std::vector<uint8_t> mask(25, 0);
  mask[2 * 5 + 2] = 1;  // single obstacle at the center of a 5x5 grid
  const DistanceField field = distance_transform(5, 5, 0.1, {0.0, 0.0, 0.0}, mask);

  CHECK(field.at(2, 2) == 0.0);
  CHECK(field.at(2, 3) == doctest::Approx(0.1));           // edge neighbor: weight 3
  CHECK(field.at(1, 1) == doctest::Approx(0.4 / 3.0));     // diagonal neighbor: weight 4
  CHECK(field.at(2, 4) == doctest::Approx(0.2));
}

TEST_CASE("chamfer distance of an empty mask is infinite") {
  const DistanceField field = distance_transform(4, 4, 0.1, {0.0, 0.0, 0.0},
                                                 std::vector<uint8_t>(16, 0));
  for (double d : field.distances) CHECK(std::isinf(d));
}

TEST_CASE("chamfer distance tracks exact Euclidean within 8 percent") {
  RandomStream rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<uint8_t> mask(900);
    for (auto& m : mask) m = rng.uniform() < 0.05 ? 1 : 0;
    mask[rng.uniform_int(0, 899)] = 1;  // at least one obstacle
    const DistanceField field = distance_transform(30, 30, 0.1, {0.0, 0.0, 0.0}, mask);
    const auto exact = oracles::brute_force_distance(30, 30, 0.1, mask);
    for (size_t i = 0; i < mask.size(); ++i) {
      if (exact[i] == 0.0) {
        CHECK(field.distances[i] == 0.0);
      } else {
        CHECK(std::abs(field.distances[i] - exact[i]) <= 0.08 * exact[i]);
      }
    }
  }
}

TEST_CASE("distance field sampling uses nearest cell and handles outside points") {
  std::vector<uint8_t> mask(25, 0);
  mask[0] = 1;
  const DistanceField field = distance_transform(5, 5, 0.1, {0.0, 0.0, 0.0}, mask);
  CHECK(field.sample({0.05, 0.05}) == 0.0);
  CHECK(field.sample({0.15, 0.05}) == doctest::Approx(0.1));
  CHECK(std::isinf(field.sample({-1.0, 0.0})));
  CHECK(std::isinf(field.sample({0.0, 99.0})));
}

TEST_CASE("costmap classes follow the distance bands") {
  TriStateMap map = blank_map(41, 41);
  map.cells[20 * 41 + 20] = CellState::Occupied;
  map.cells[5 * 41 + 5] = CellState::Unknown;

  InflationParams params;
  params.inscribed_radius = 0.15;
  params.circumscribed_radius = 0.25;
  params.inflation_radius = 0.8;
  params.decay_weight = 5.0;
  const Costmap cm = build_costmap(map, params);

  CHECK(cm.at({20, 20}) == Costmap::kLethal);
  CHECK(cm.at({5, 5}) == Costmap::kUnknown);
  CHECK(cm.at({20, 21}) == Costmap::kInscribed);  // 0.1 m < inscribed radius

  // 0.2 m out: inside the decay band, value 252*exp(-5*(0.2-0.15))
  const uint8_t band = cm.at({20, 22});
  CHECK(band == static_cast<uint8_t>(std::lround(252.0 * std::exp(-5.0 * 0.05))));
  CHECK(band >= 1);
  CHECK(band <= 252);

  // 2 * inflation_radius away: free
  CHECK(cm.at({20, 36}) == Costmap::kFree);
  CHECK(cm.at({38, 20}) == Costmap::kFree);
}

TEST_CASE("inflated cost never increases with distance") {
  RandomStream rng(23);
  TriStateMap map = blank_map(30, 30);
  for (int i = 0; i < 12; ++i) {
    map.cells[rng.uniform_int(0, 899)] = CellState::Occupied;
  }
  InflationParams params;
  const Costmap cm = build_costmap(map, params);

  std::vector<uint8_t> occupied(map.cells.size());
  for (size_t i = 0; i < map.cells.size(); ++i) {
    occupied[i] = map.cells[i] == CellState::Occupied ? 1 : 0;
  }
  const DistanceField field = distance_transform(30, 30, 0.1, {0.0, 0.0, 0.0}, occupied);

  for (size_t a = 0; a < map.cells.size(); ++a) {
    for (size_t b = a + 1; b < map.cells.size(); ++b) {
      if (cm.cells[a] >= Costmap::kInscribed || cm.cells[b] >= Costmap::kInscribed) continue;
      if (field.distances[a] < field.distances[b]) {
        CHECK(cm.cells[a] >= cm.cells[b]);
      }
    }
  }
}

TEST_CASE("mirroring the occupancy input mirrors the costmap") {
  RandomStream rng(29);
  TriStateMap map = blank_map(20, 20);
  for (int i = 0; i < 30; ++i) {
    const int cell = rng.uniform_int(0, 399);
    map.cells[cell] = rng.uniform() < 0.7 ? CellState::Occupied : CellState::Unknown;
  }
  TriStateMap mirrored = map;
  for (int row = 0; row < 20; ++row) {
    for (int col = 0; col < 20; ++col) {
      mirrored.cells[row * 20 + col] = map.cells[(19 - row) * 20 + col];
    }
  }
  const Costmap a = build_costmap(map, {});
  const Costmap b = build_costmap(mirrored, {});
  for (int row = 0; row < 20; ++row) {
    for (int col = 0; col < 20; ++col) {
      CHECK(a.at({row, col}) == b.at({19 - row, col}));
    }
  }
}

TEST_CASE("cost_at reads the containing cell and is lethal outside") {
  TriStateMap map = blank_map(10, 10);
  map.cells[0] = CellState::Occupied;
  const Costmap cm = build_costmap(map, {});
  CHECK(cost_at(cm, {0.05, 0.05}) == Costmap::kLethal);
  CHECK(cost_at(cm, {-0.01, 0.5}) == Costmap::kLethal);  // outside the extent
  CHECK(cost_at(cm, {5.0, 99.0}) == Costmap::kLethal);
  // floor convention: the shared edge belongs to the upper cell
  CHECK(cost_at(cm, {0.1, 0.05}) == cm.at({0, 1}));
}

TEST_CASE("inflation parameter validation") {
  InflationParams params;
  params.inscribed_radius = 0.3;
  params.circumscribed_radius = 0.2;  // smaller than inscribed
  CHECK_THROWS_AS(validate(params), ConfigError);
  params.circumscribed_radius = 0.4;
  params.inflation_radius = 0.1;
  CHECK_THROWS_AS(validate(params), ConfigError);
  params.inflation_radius = 1.0;
  params.decay_weight = 0.0;
  CHECK_THROWS_AS(validate(params), ConfigError);
}

TEST_CASE("costmap serializes in the grid file format") {
  TriStateMap map = blank_map(6, 4);
  map.cells[7] = CellState::Occupied;
  const Costmap cm = build_costmap(map, {});
  const GridData data = encode_costmap(cm);
  CHECK(data.kind == "cost");
  const GridData parsed = parse_grid(serialize_grid(data));
  CHECK(parsed.values == cm.cells);
}
