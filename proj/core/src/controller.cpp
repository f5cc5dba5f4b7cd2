#include "navcore/controller.hpp"

#include <algorithm>
#include <cmath>

#include "navcore/errors.hpp"

namespace navcore {

namespace {

double clamp_magnitude(double value, double limit) {
  return std::clamp(value, -limit, limit);
}

}  // namespace

void validate(const PidGains& gains) {
  const double non_negative[] = {gains.kp_linear,  gains.ki_linear,  gains.kd_linear,
                                 gains.kp_angular, gains.ki_angular, gains.kd_angular};
  for (double g : non_negative) {
    if (!std::isfinite(g) || g < 0.0) throw ConfigError("pid gains must be >= 0");
  }
  if (!(gains.integral_limit > 0.0)) throw ConfigError("integral_limit must be positive");
  if (!(gains.max_linear > 0.0) || !(gains.max_angular > 0.0)) {
    throw ConfigError("output limits must be positive");
  }
}

Twist2D pid_track(const Pose2D& current, const Twist2D& feedforward, const Pose2D& target,
                  const PidGains& gains, double dt, PidState& state) {
  validate(gains);
  if (!(dt > 0.0) || !std::isfinite(dt)) throw DomainError("dt must be positive and finite");

  const double dx = target.x - current.x;
  const double dy = target.y - current.y;
  const double err_linear = dx * std::cos(current.theta) + dy * std::sin(current.theta);
  const double err_angular = std::hypot(dx, dy) > 1e-9
                                 ? wrap_angle(std::atan2(dy, dx) - current.theta)
                                 : wrap_angle(target.theta - current.theta);

  state.integral_linear =
      clamp_magnitude(state.integral_linear + err_linear * dt, gains.integral_limit);
  state.integral_angular =
      clamp_magnitude(state.integral_angular + err_angular * dt, gains.integral_limit);

  const double deriv_linear = state.has_previous ? (err_linear - state.prev_error_linear) / dt : 0.0;
  const double deriv_angular =
      state.has_previous ? (err_angular - state.prev_error_angular) / dt : 0.0;
  state.prev_error_linear = err_linear;
  state.prev_error_angular = err_angular;
  state.has_previous = true;

  Twist2D out;
  out.v = clamp_magnitude(feedforward.v + gains.kp_linear * err_linear +
                              gains.ki_linear * state.integral_linear +
                              gains.kd_linear * deriv_linear,
                          gains.max_linear);
  out.omega = clamp_magnitude(feedforward.omega + gains.kp_angular * err_angular +
                                  gains.ki_angular * state.integral_angular +
                                  gains.kd_angular * deriv_angular,
                              gains.max_angular);
  return out;
}

AckermannCommand ackermann_convert(const Twist2D& twist, double wheelbase, double max_steer) {
  if (!(wheelbase > 0.0)) throw ConfigError("wheelbase must be positive");
  if (!(max_steer > 0.0)) throw ConfigError("max_steer must be positive");

  AckermannCommand out;
  if (twist.omega == 0.0) {
    out.command = {twist.v, 0.0};
    return out;
  }
  if (twist.v != 0.0) {
    out.command.v = twist.v;
    out.command.phi =
        clamp_magnitude(std::atan(wheelbase * twist.omega / twist.v), max_steer);
    return out;
  }
  out.command.v = 0.0;
  out.command.phi = std::copysign(max_steer, twist.omega);
  out.infeasible = true;
  return out;
}

Twist2D ackermann_invert(const DriveCommand& cmd, double wheelbase) {
  if (!(wheelbase > 0.0)) throw ConfigError("wheelbase must be positive");
  if (!(std::abs(cmd.phi) < kPi / 2.0)) throw DomainError("steering angle must be inside +-pi/2");
  return {cmd.v, cmd.v * std::tan(cmd.phi) / wheelbase};
}

}  // namespace navcore
