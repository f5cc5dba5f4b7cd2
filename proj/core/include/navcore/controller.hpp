#ifndef NAVCORE_CONTROLLER_HPP
#define NAVCORE_CONTROLLER_HPP

#include "navcore/types.hpp"
#include "navcore/world.hpp"

namespace navcore {

struct PidGains {
  double kp_linear = 1.5;
  double ki_linear = 0.0;
  double kd_linear = 0.0;
  double kp_angular = 3.0;
  double ki_angular = 0.0;
  double kd_angular = 0.0;
  double integral_limit = 1.0;  // anti-windup bound on each integrator
  double max_linear = 1.0;      // output clamp, m/s
  double max_angular = 2.5;     // output clamp, rad/s
};

// Integrator and derivative memory; one instance per controlled vehicle.
struct PidState {
  double integral_linear = 0.0;
  double integral_angular = 0.0;
  double prev_error_linear = 0.0;
  double prev_error_angular = 0.0;
  bool has_previous = false;
};

void validate(const PidGains& gains);

// One tracking step. Linear error is the target offset projected on the
// current heading, angular error the wrapped bearing to the target (goal
// heading when the target is underfoot). Output is feedforward plus the PID
// correction, clamped to the gains' limits.
Twist2D pid_track(const Pose2D& current, const Twist2D& feedforward, const Pose2D& target,
                  const PidGains& gains, double dt, PidState& state);

// A zero-speed turn request cannot be steered; the command saturates toward
// the turn and the flag marks it infeasible.
struct AckermannCommand {
  DriveCommand command;
  bool infeasible = false;
};

// phi = atan(wheelbase * omega / v), clamped to the steering limit. omega = 0
// maps to phi = 0 exactly for any v.
AckermannCommand ackermann_convert(const Twist2D& twist, double wheelbase, double max_steer);

// Algebraic inverse on the unclamped region: omega = v * tan(phi) / wheelbase.
Twist2D ackermann_invert(const DriveCommand& cmd, double wheelbase);

}  // namespace navcore

#endif  // NAVCORE_CONTROLLER_HPP
