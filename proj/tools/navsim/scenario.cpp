#include "navsim/scenario.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "navcore/errors.hpp"

namespace navsim {

using navcore::ConfigError;
using navcore::IoError;

namespace {

std::string trim(const std::string& s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::vector<double> parse_numbers(const std::string& text, const std::string& key) {
  std::vector<double> out;
  std::istringstream in(text);
  std::string token;
  while (in >> token) {
    char* end = nullptr;
    const double value = std::strtod(token.c_str(), &end);
    if (end == token.c_str() || *end != '\0') {
      throw ConfigError("scenario key '" + key + "' has a non-numeric value '" + token + "'");
    }
    out.push_back(value);
  }
  return out;
}

const std::vector<double>& expect(const std::vector<double>& values, size_t count,
                                  const std::string& key) {
  if (values.size() != count) {
    throw ConfigError("scenario key '" + key + "' expects " + std::to_string(count) +
                      " values, got " + std::to_string(values.size()));
  }
  return values;
}

}  // namespace

Scenario parse_scenario_text(const std::string& text) {
  Scenario sc;
  std::string section;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;

  while (std::getline(in, raw)) {
    ++line_no;
    const size_t hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigError("scenario line " + std::to_string(line_no) + ": unterminated section");
      }
      section = trim(line.substr(1, line.size() - 2));
      const bool known = section == "world" || section == "vehicle" || section == "lidar" ||
                         section == "imu" || section == "slam" || section == "mcl" ||
                         section == "costmap" || section == "planner" ||
                         section == "controller" || section == "mission";
      if (!known) throw ConfigError("unknown scenario section [" + section + "]");
      continue;
    }

    const size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("scenario line " + std::to_string(line_no) + ": expected key = values");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value_text = trim(line.substr(eq + 1));

    if (section.empty()) {
      if (key == "seed") {
        char* end = nullptr;
        sc.seed = std::strtoull(value_text.c_str(), &end, 10);
        if (end == value_text.c_str() || *end != '\0') {
          throw ConfigError("seed must be a non-negative integer");
        }
        continue;
      }
      throw ConfigError("key '" + key + "' appears before any section");
    }

    const std::vector<double> v = parse_numbers(value_text, key);

    if (section == "world") {
      if (key == "bounds") {
        expect(v, 4, key);
        sc.world.bounds = {v[0], v[1], v[2], v[3]};
      } else if (key == "obstacle") {
        if (v.size() < 6 || v.size() % 2 != 0) {
          throw ConfigError("obstacle needs an even list of at least 6 coordinates");
        }
        navcore::Polygon poly;
        for (size_t i = 0; i < v.size(); i += 2) poly.vertices.push_back({v[i], v[i + 1]});
        sc.world.obstacles.push_back(poly);
      } else {
        throw ConfigError("unknown key '" + key + "' in [world]");
      }
    } else if (section == "vehicle") {
      if (key == "start") {
        expect(v, 3, key);
        sc.start = {v[0], v[1], v[2]};
      } else if (key == "wheelbase") {
        sc.vehicle.wheelbase = expect(v, 1, key)[0];
      } else if (key == "max_speed") {
        sc.vehicle.max_speed = expect(v, 1, key)[0];
      } else if (key == "max_accel") {
        sc.vehicle.max_accel = expect(v, 1, key)[0];
      } else if (key == "max_steer") {
        sc.vehicle.max_steer = expect(v, 1, key)[0];
      } else if (key == "footprint_inscribed") {
        sc.vehicle.footprint_radius_inscribed = expect(v, 1, key)[0];
      } else if (key == "footprint_circumscribed") {
        sc.vehicle.footprint_radius_circumscribed = expect(v, 1, key)[0];
      } else {
        throw ConfigError("unknown key '" + key + "' in [vehicle]");
      }
    } else if (section == "lidar") {
      if (key == "beams") {
        sc.lidar.beam_count = static_cast<int>(expect(v, 1, key)[0]);
      } else if (key == "fov") {
        sc.lidar.fov = expect(v, 1, key)[0];
      } else if (key == "z_max") {
        sc.lidar.z_max = expect(v, 1, key)[0];
      } else if (key == "angular_offset") {
        sc.lidar.angular_offset = expect(v, 1, key)[0];
      } else if (key == "z_hit") {
        sc.sensor_noise.z_hit = expect(v, 1, key)[0];
      } else if (key == "z_short") {
        sc.sensor_noise.z_short = expect(v, 1, key)[0];
      } else if (key == "z_max_weight") {
        sc.sensor_noise.z_max_w = expect(v, 1, key)[0];
      } else if (key == "z_rand") {
        sc.sensor_noise.z_rand = expect(v, 1, key)[0];
      } else if (key == "sigma_hit") {
        sc.sensor_noise.sigma_hit = expect(v, 1, key)[0];
      } else if (key == "lambda_short") {
        sc.sensor_noise.lambda_short = expect(v, 1, key)[0];
      } else {
        throw ConfigError("unknown key '" + key + "' in [lidar]");
      }
    } else if (section == "imu") {
      if (key == "yaw_rate_noise") {
        sc.imu_yaw_rate_noise = expect(v, 1, key)[0];
      } else if (key == "accel_noise") {
        sc.imu_accel_noise = expect(v, 1, key)[0];
      } else {
        throw ConfigError("unknown key '" + key + "' in [imu]");
      }
    } else if (section == "slam") {
      if (key == "resolution") {
        sc.slam.resolution = expect(v, 1, key)[0];
      } else if (key == "margin") {
        sc.slam.margin = expect(v, 1, key)[0];
      } else if (key == "divergence_threshold") {
        sc.slam.divergence_threshold = expect(v, 1, key)[0];
      } else if (key == "match_iterations") {
        sc.slam.match.max_iterations = static_cast<int>(expect(v, 1, key)[0]);
      } else if (key == "step_tolerance") {
        sc.slam.match.step_tolerance = expect(v, 1, key)[0];
      } else {
        throw ConfigError("unknown key '" + key + "' in [slam]");
      }
    } else if (section == "mcl") {
      if (key == "particles") {
        sc.mcl_particles = static_cast<int>(expect(v, 1, key)[0]);
      } else if (key == "motion") {
        expect(v, 4, key);
        sc.mcl.motion = {v[0], v[1], v[2], v[3]};
      } else if (key == "alpha_slow") {
        sc.mcl.augmented.alpha_slow = expect(v, 1, key)[0];
      } else if (key == "alpha_fast") {
        sc.mcl.augmented.alpha_fast = expect(v, 1, key)[0];
      } else if (key == "sensor") {
        const int kind = static_cast<int>(expect(v, 1, key)[0]);
        sc.mcl.sensor = kind == 1 ? navcore::SensorModelKind::kBeam
                                  : navcore::SensorModelKind::kLikelihoodField;
      } else if (key == "field_sigma") {
        sc.mcl.field.sigma = expect(v, 1, key)[0];
      } else if (key == "field_z_hit") {
        sc.mcl.field.z_hit = expect(v, 1, key)[0];
      } else if (key == "field_z_rand") {
        sc.mcl.field.z_rand = expect(v, 1, key)[0];
      } else if (key == "field_max_distance") {
        sc.mcl.field.max_distance = expect(v, 1, key)[0];
      } else if (key == "beam_stride") {
        sc.mcl.beam_stride = static_cast<int>(expect(v, 1, key)[0]);
      } else if (key == "kld_epsilon") {
        sc.mcl.kld.epsilon = expect(v, 1, key)[0];
      } else if (key == "kld_delta") {
        sc.mcl.kld.delta = expect(v, 1, key)[0];
      } else if (key == "bin_xy") {
        sc.mcl.kld.bin_xy = expect(v, 1, key)[0];
      } else if (key == "bin_theta") {
        sc.mcl.kld.bin_theta = expect(v, 1, key)[0];
      } else if (key == "n_min") {
        sc.mcl.kld.n_min = static_cast<int>(expect(v, 1, key)[0]);
      } else if (key == "n_max") {
        sc.mcl.kld.n_max = static_cast<int>(expect(v, 1, key)[0]);
      } else {
        throw ConfigError("unknown key '" + key + "' in [mcl]");
      }
    } else if (section == "costmap") {
      if (key == "inscribed_radius") {
        sc.costmap.inscribed_radius = expect(v, 1, key)[0];
      } else if (key == "circumscribed_radius") {
        sc.costmap.circumscribed_radius = expect(v, 1, key)[0];
      } else if (key == "inflation_radius") {
        sc.costmap.inflation_radius = expect(v, 1, key)[0];
      } else if (key == "decay_weight") {
        sc.costmap.decay_weight = expect(v, 1, key)[0];
      } else {
        throw ConfigError("unknown key '" + key + "' in [costmap]");
      }
    } else if (section == "planner") {
      if (key == "cost_scale") {
        sc.planner.cost_scale = expect(v, 1, key)[0];
      } else if (key == "max_vel") {
        sc.teb.max_vel = expect(v, 1, key)[0];
      } else if (key == "max_accel") {
        sc.teb.max_accel = expect(v, 1, key)[0];
      } else if (key == "min_obstacle_dist") {
        sc.teb.min_obstacle_dist = expect(v, 1, key)[0];
      } else if (key == "min_turn_radius") {
        sc.teb.min_turn_radius = expect(v, 1, key)[0];
      } else if (key == "ref_resolution") {
        sc.teb.ref_resolution = expect(v, 1, key)[0];
      } else if (key == "weight_time") {
        sc.teb.weights.time = expect(v, 1, key)[0];
      } else if (key == "weight_obstacle") {
        sc.teb.weights.obstacle = expect(v, 1, key)[0];
      } else if (key == "weight_velocity") {
        sc.teb.weights.velocity = expect(v, 1, key)[0];
      } else if (key == "weight_acceleration") {
        sc.teb.weights.acceleration = expect(v, 1, key)[0];
      } else if (key == "weight_kinematics") {
        sc.teb.weights.kinematics = expect(v, 1, key)[0];
      } else if (key == "weight_turning_radius") {
        sc.teb.weights.turning_radius = expect(v, 1, key)[0];
      } else {
        throw ConfigError("unknown key '" + key + "' in [planner]");
      }
    } else if (section == "controller") {
      if (key == "kp_linear") {
        sc.pid.kp_linear = expect(v, 1, key)[0];
      } else if (key == "ki_linear") {
        sc.pid.ki_linear = expect(v, 1, key)[0];
      } else if (key == "kd_linear") {
        sc.pid.kd_linear = expect(v, 1, key)[0];
      } else if (key == "kp_angular") {
        sc.pid.kp_angular = expect(v, 1, key)[0];
      } else if (key == "ki_angular") {
        sc.pid.ki_angular = expect(v, 1, key)[0];
      } else if (key == "kd_angular") {
        sc.pid.kd_angular = expect(v, 1, key)[0];
      } else if (key == "integral_limit") {
        sc.pid.integral_limit = expect(v, 1, key)[0];
      } else if (key == "max_linear") {
        sc.pid.max_linear = expect(v, 1, key)[0];
      } else if (key == "max_angular") {
        sc.pid.max_angular = expect(v, 1, key)[0];
      } else if (key == "rate") {
        sc.control.rate = expect(v, 1, key)[0];
      } else if (key == "replan_every") {
        sc.control.replan_every = static_cast<int>(expect(v, 1, key)[0]);
      } else if (key == "goal_tol_xy") {
        sc.control.goal_tol_xy = expect(v, 1, key)[0];
      } else if (key == "goal_tol_theta") {
        sc.control.goal_tol_theta = expect(v, 1, key)[0];
      } else if (key == "goal_timeout") {
        sc.control.goal_timeout = expect(v, 1, key)[0];
      } else {
        throw ConfigError("unknown key '" + key + "' in [controller]");
      }
    } else if (section == "mission") {
      if (key == "drive") {
        expect(v, 3, key);
        sc.mission.mapping.push_back({v[0], {v[1], v[2]}});
      } else if (key == "goal") {
        expect(v, 3, key);
        sc.mission.goals.push_back({v[0], v[1], v[2]});
      } else {
        throw ConfigError("unknown key '" + key + "' in [mission]");
      }
    }
  }

  // The SLAM map must cover the world the scans come from.
  sc.slam.bounds = sc.world.bounds;
  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open scenario file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario_text(buf.str());
}

void validate(const Scenario& sc) {
  navcore::validate(sc.world);
  navcore::validate(sc.vehicle);
  navcore::validate(sc.lidar);
  navcore::validate(sc.sensor_noise);
  navcore::validate(sc.mcl);
  navcore::validate(sc.costmap);
  navcore::validate(sc.teb);
  navcore::validate(sc.pid);
  if (!(sc.control.rate > 0.0)) throw ConfigError("control rate must be positive");
  if (sc.control.replan_every < 1) throw ConfigError("replan_every must be >= 1");
  if (!(sc.control.goal_tol_xy > 0.0) || !(sc.control.goal_tol_theta > 0.0)) {
    throw ConfigError("goal tolerances must be positive");
  }
  if (!(sc.control.goal_timeout > 0.0)) throw ConfigError("goal_timeout must be positive");
  if (sc.mcl_particles < 10) throw ConfigError("mcl particles must be >= 10");
  if (sc.imu_yaw_rate_noise < 0.0 || sc.imu_accel_noise < 0.0) {
    throw ConfigError("imu noise must be >= 0");
  }
  if (!navcore::is_collision_free(sc.world, sc.start.position(),
                                  sc.vehicle.footprint_radius_circumscribed)) {
    throw ConfigError("start pose is in collision");
  }
}

}  // namespace navsim
