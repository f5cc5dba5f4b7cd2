#ifndef NAVSIM_RUNLOG_HPP
#define NAVSIM_RUNLOG_HPP

#include <string>
#include <vector>

#include "navcore/types.hpp"
#include "navcore/world.hpp"

namespace navsim {

struct RunRecord {
  double t = 0.0;
  navcore::Pose2D ground_truth;
  navcore::Pose2D estimate;  // fused filter pose
  navcore::Pose2D mcl;       // raw particle estimate
  navcore::DriveCommand command;
  double min_clearance = 0.0;  // ground-truth footprint clearance, m
};

struct GoalSummary {
  bool reached = false;
  double time = 0.0;         // s spent on this goal
  double path_length = 0.0;  // ground-truth meters driven
};

struct RunLog {
  std::vector<RunRecord> records;
  std::vector<GoalSummary> goals;
};

// CSV with 9 significant digits; goal summaries ride along as trailing
// comment lines. Timestamps must be strictly increasing.
void write_runlog(const std::string& path, const RunLog& log);
RunLog read_runlog(const std::string& path);

struct MetricsSummary {
  int goals_total = 0;
  int goals_reached = 0;
  double rms_position_error = 0.0;  // estimate vs ground truth, m
  double min_clearance = 0.0;
  bool collision = false;
  double total_time = 0.0;
  double total_length = 0.0;  // ground-truth meters
};

MetricsSummary compute_metrics(const RunLog& log);
std::string format_metrics(const MetricsSummary& summary);

}  // namespace navsim

#endif  // NAVSIM_RUNLOG_HPP
