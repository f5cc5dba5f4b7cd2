#include <cstdio>
#include <exception>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "navcore/errors.hpp"
#include "navcore/grid.hpp"
#include "navsim/pipeline.hpp"
#include "navsim/render.hpp"
#include "navsim/runlog.hpp"
#include "navsim/scenario.hpp"

namespace {

struct CommonArgs {
  std::string scenario_path;
  std::string render_dir;
  uint64_t seed = 0;
  bool seed_set = false;
};

navsim::Scenario load_with_seed(const CommonArgs& args) {
  navsim::Scenario sc = navsim::load_scenario(args.scenario_path);
  if (args.seed_set) sc.seed = args.seed;
  return sc;
}

int do_map(const CommonArgs& args, const std::string& map_path,
           const std::string& log_path) {
  const navsim::Scenario sc = load_with_seed(args);
  const navsim::MappingResult result = navsim::run_mapping(sc);
  navcore::save_grid(navcore::encode_occupancy(result.slam.grid), map_path);
  if (!log_path.empty()) navsim::write_runlog(log_path, result.log);
  if (!args.render_dir.empty()) {
    navsim::render_frames(result.log, result.slam.grid, args.render_dir, 10);
  }
  std::printf("map: %d x %d cells, %zu scans, %d skipped\n", result.slam.grid.width(),
              result.slam.grid.height(), result.log.records.size(),
              result.slam.skipped_scans);
  return 0;
}

int do_navigate(const CommonArgs& args, const std::string& map_path,
                const std::string& log_path) {
  const navsim::Scenario sc = load_with_seed(args);
  const navcore::OccupancyGrid map =
      navcore::decode_occupancy(navcore::load_grid(map_path));

  std::map<int, navsim::FrameOverlay> overlays;
  navsim::NavigationOptions options;
  if (!args.render_dir.empty()) options.overlays = &overlays;

  const navsim::RunLog log = navsim::run_navigation(sc, map, options);
  navsim::write_runlog(log_path, log);
  if (!args.render_dir.empty() && !log.records.empty()) {
    navsim::render_frames(log, map, args.render_dir, 10, &overlays);
  }

  const navsim::MetricsSummary metrics = navsim::compute_metrics(log);
  std::fputs(navsim::format_metrics(metrics).c_str(), stdout);
  return metrics.goals_reached == metrics.goals_total ? 0 : 2;
}

int do_metrics(const std::string& log_path) {
  const navsim::RunLog log = navsim::read_runlog(log_path);
  std::fputs(navsim::format_metrics(navsim::compute_metrics(log)).c_str(), stdout);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"2D navigation stack simulator"};
  app.require_subcommand(1);

  CommonArgs map_args, nav_args, run_args;
  std::string map_out, map_log, nav_map, nav_log, run_map, run_log_path, metrics_log;

  auto add_common = [](CLI::App* cmd, CommonArgs& args, bool scenario_needed = true) {
    auto* opt = cmd->add_option("--scenario", args.scenario_path, "scenario file");
    if (scenario_needed) opt->required();
    cmd->add_option("--seed", args.seed, "override the scenario seed")
        ->each([&args](const std::string&) { args.seed_set = true; });
    cmd->add_option("--render", args.render_dir, "write SVG frames to this directory");
  };

  CLI::App* cmd_map = app.add_subcommand("map", "run the scripted mapping pass");
  add_common(cmd_map, map_args);
  cmd_map->add_option("--out", map_out, "occupancy map output file")->required();
  cmd_map->add_option("--log", map_log, "also write the mapping trajectory log");

  CLI::App* cmd_nav = app.add_subcommand("navigate", "drive the mission goals");
  add_common(cmd_nav, nav_args);
  cmd_nav->add_option("--map", nav_map, "occupancy map input file")->required();
  cmd_nav->add_option("--out", nav_log, "run log output file")->required();

  CLI::App* cmd_run = app.add_subcommand("run", "map then navigate");
  add_common(cmd_run, run_args);
  cmd_run->add_option("--map", run_map, "occupancy map output file")->required();
  cmd_run->add_option("--log", run_log_path, "run log output file")->required();

  CLI::App* cmd_metrics = app.add_subcommand("metrics", "summarize a run log");
  cmd_metrics->add_option("--log", metrics_log, "run log input file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_map->parsed()) return do_map(map_args, map_out, map_log);
    if (cmd_nav->parsed()) return do_navigate(nav_args, nav_map, nav_log);
    if (cmd_run->parsed()) {
      CommonArgs map_pass = run_args;
      CommonArgs nav_pass = run_args;
      if (!run_args.render_dir.empty()) {
        map_pass.render_dir += "/map";
        nav_pass.render_dir += "/navigate";
      }
      const int map_rc = do_map(map_pass, run_map, "");
      if (map_rc != 0) return map_rc;
      return do_navigate(nav_pass, run_map, run_log_path);
    }
    return do_metrics(metrics_log);
  } catch (const std::exception& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return 1;
  }
}
