#include "navsim/runlog.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "navcore/errors.hpp"

namespace navsim {

using navcore::DomainError;
using navcore::IoError;

namespace {

constexpr const char* kHeader =
    "t,gt_x,gt_y,gt_theta,est_x,est_y,est_theta,mcl_x,mcl_y,mcl_theta,cmd_v,cmd_phi,"
    "min_clearance";

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

void check_monotonic(const RunLog& log) {
  for (size_t i = 1; i < log.records.size(); ++i) {
    if (!(log.records[i].t > log.records[i - 1].t)) {
      throw DomainError("run log timestamps must be strictly increasing");
    }
  }
}

}  // namespace

void write_runlog(const std::string& path, const RunLog& log) {
  check_monotonic(log);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write run log: " + path);
  out << kHeader << '\n';
  for (const RunRecord& r : log.records) {
    out << fmt(r.t) << ',' << fmt(r.ground_truth.x) << ',' << fmt(r.ground_truth.y) << ','
        << fmt(r.ground_truth.theta) << ',' << fmt(r.estimate.x) << ',' << fmt(r.estimate.y)
        << ',' << fmt(r.estimate.theta) << ',' << fmt(r.mcl.x) << ',' << fmt(r.mcl.y) << ','
        << fmt(r.mcl.theta) << ',' << fmt(r.command.v) << ',' << fmt(r.command.phi) << ','
        << fmt(r.min_clearance) << '\n';
  }
  for (size_t i = 0; i < log.goals.size(); ++i) {
    const GoalSummary& g = log.goals[i];
    out << "# goal " << i << " reached=" << (g.reached ? 1 : 0) << " time=" << fmt(g.time)
        << " length=" << fmt(g.path_length) << '\n';
  }
  if (!out) throw IoError("failed while writing run log: " + path);
}

RunLog read_runlog(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open run log: " + path);
  RunLog log;
  std::string line;
  if (!std::getline(in, line) || line != kHeader) {
    throw IoError("run log header mismatch: " + path);
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.front() == '#') {
      GoalSummary g;
      int index = 0, reached = 0;
      double time = 0.0, length = 0.0;
      if (std::sscanf(line.c_str(), "# goal %d reached=%d time=%lf length=%lf", &index,
                      &reached, &time, &length) != 4) {
        throw IoError("malformed goal summary line: " + line);
      }
      g.reached = reached != 0;
      g.time = time;
      g.path_length = length;
      log.goals.push_back(g);
      continue;
    }
    RunRecord r;
    double f[13];
    std::istringstream row(line);
    for (int i = 0; i < 13; ++i) {
      std::string cell;
      if (!std::getline(row, cell, ',')) throw IoError("short run log row: " + line);
      try {
        f[i] = std::stod(cell);
      } catch (const std::exception&) {
        throw IoError("non-numeric run log cell: " + cell);
      }
    }
    r.t = f[0];
    r.ground_truth = {f[1], f[2], f[3]};
    r.estimate = {f[4], f[5], f[6]};
    r.mcl = {f[7], f[8], f[9]};
    r.command = {f[10], f[11]};
    r.min_clearance = f[12];
    log.records.push_back(r);
  }
  check_monotonic(log);
  return log;
}

MetricsSummary compute_metrics(const RunLog& log) {
  if (log.records.empty() && log.goals.empty()) throw DomainError("run log is empty");

  MetricsSummary s;
  s.goals_total = static_cast<int>(log.goals.size());
  for (const GoalSummary& g : log.goals) {
    if (g.reached) ++s.goals_reached;
  }

  double sq_sum = 0.0;
  s.min_clearance = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < log.records.size(); ++i) {
    const RunRecord& r = log.records[i];
    const double ex = r.estimate.x - r.ground_truth.x;
    const double ey = r.estimate.y - r.ground_truth.y;
    sq_sum += ex * ex + ey * ey;
    s.min_clearance = std::min(s.min_clearance, r.min_clearance);
    if (i > 0) {
      s.total_length += std::hypot(r.ground_truth.x - log.records[i - 1].ground_truth.x,
                                   r.ground_truth.y - log.records[i - 1].ground_truth.y);
    }
  }
  if (!log.records.empty()) {
    s.rms_position_error = std::sqrt(sq_sum / static_cast<double>(log.records.size()));
    s.total_time = log.records.back().t - log.records.front().t;
    s.collision = s.min_clearance <= 0.0;
  } else {
    s.min_clearance = 0.0;
  }
  return s;
}

std::string format_metrics(const MetricsSummary& s) {
  std::ostringstream out;
  out << "goals reached:      " << s.goals_reached << "/" << s.goals_total << '\n';
  out << "rms position error: " << fmt(s.rms_position_error) << " m\n";
  out << "min clearance:      " << fmt(s.min_clearance) << " m\n";
  out << "collision:          " << (s.collision ? "yes" : "no") << '\n';
  out << "total time:         " << fmt(s.total_time) << " s\n";
  out << "total length:       " << fmt(s.total_length) << " m\n";
  return out.str();
}

}  // namespace navsim
