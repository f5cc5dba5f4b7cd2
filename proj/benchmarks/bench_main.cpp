#include <benchmark/benchmark.h>

#include "navcore/lidar.hpp"
#include "navcore/world.hpp"

namespace {

navcore::WorldModel bench_world() {
  navcore::WorldModel world;
  world.bounds = {-10.0, -10.0, 10.0, 10.0};
  world.obstacles.push_back({{{-2.0, -2.0}, {-1.0, -2.0}, {-1.0, -1.0}, {-2.0, -1.0}}});
  world.obstacles.push_back({{{3.0, 1.0}, {5.0, 1.0}, {5.0, 4.0}, {3.0, 4.0}}});
  world.obstacles.push_back({{{-6.0, 3.0}, {-4.0, 4.0}, {-6.0, 5.0}}});
  return world;
}

void BM_CastScan(benchmark::State& state) {
  const navcore::WorldModel world = bench_world();
  navcore::LidarConfig cfg;
  cfg.beam_count = static_cast<int>(state.range(0));
  for (auto _ : state) {
    auto scan = navcore::cast_scan(world, {0.5, 0.5, 0.3}, cfg);
    benchmark::DoNotOptimize(scan.ranges.data());
  }
}
BENCHMARK(BM_CastScan)->Arg(90)->Arg(360);

}  // namespace

BENCHMARK_MAIN();
