#include "navcore/ekf.hpp"

#include <cmath>

#include "navcore/errors.hpp"

namespace navcore {

namespace {

// Chi-square 0.999 quantiles for 1, 2, 3 degrees of freedom.
constexpr double kGate[4] = {0.0, 10.828, 13.816, 16.266};

void symmetrize(Eigen::Matrix<double, 5, 5>& m) {
  m = 0.5 * (m + m.transpose()).eval();
}

}  // namespace

EkfState ekf_init(const Pose2D& pose, const Eigen::Matrix<double, 5, 5>& covariance) {
  EkfState state;
  state.mean << pose.x, pose.y, wrap_angle(pose.theta), 0.0, 0.0;
  state.covariance = covariance;
  symmetrize(state.covariance);
  return state;
}

Eigen::Matrix<double, 5, 5> ekf_motion_jacobian(const EkfState& state, double dt) {
  const double theta = state.mean(2);
  const double v = state.mean(3);
  const double omega = state.mean(4);
  const double st = std::sin(theta);
  const double ct = std::cos(theta);

  Eigen::Matrix<double, 5, 5> jac = Eigen::Matrix<double, 5, 5>::Identity();
  jac(2, 4) = dt;

  if (std::abs(omega) <= 1e-6) {
    // Straight-line limit; omega sensitivities from the first Taylor term.
    jac(0, 2) = -v * dt * st;
    jac(0, 3) = dt * ct;
    jac(0, 4) = -0.5 * v * dt * dt * st;
    jac(1, 2) = v * dt * ct;
    jac(1, 3) = dt * st;
    jac(1, 4) = 0.5 * v * dt * dt * ct;
    return jac;
  }

  const double theta2 = theta + omega * dt;
  const double st2 = std::sin(theta2);
  const double ct2 = std::cos(theta2);
  const double r = v / omega;

  jac(0, 2) = r * (ct2 - ct);
  jac(0, 3) = (st2 - st) / omega;
  jac(0, 4) = -r / omega * (st2 - st) + r * dt * ct2;
  jac(1, 2) = r * (st2 - st);
  jac(1, 3) = (ct - ct2) / omega;
  jac(1, 4) = -r / omega * (ct - ct2) + r * dt * st2;
  return jac;
}

EkfState ekf_predict(const EkfState& state, double dt,
                     const Eigen::Matrix<double, 5, 5>& process_noise) {
  if (!(dt > 0.0)) throw DomainError("dt must be positive");

  const Eigen::Matrix<double, 5, 5> jac = ekf_motion_jacobian(state, dt);

  EkfState next = state;
  const Pose2D advanced =
      arc_advance(state.pose(), state.mean(3), state.mean(4), dt);
  next.mean(0) = advanced.x;
  next.mean(1) = advanced.y;
  next.mean(2) = advanced.theta;

  next.covariance = jac * state.covariance * jac.transpose() + process_noise * dt;
  symmetrize(next.covariance);
  return next;
}

EkfUpdateResult ekf_update(const EkfState& state, const Eigen::VectorXd& z,
                           MeasurementModel model, const Eigen::MatrixXd& noise) {
  int dim = 0;
  switch (model) {
    case MeasurementModel::kScanMatchTwist: dim = 2; break;
    case MeasurementModel::kImuYawRate: dim = 1; break;
    case MeasurementModel::kMclPose: dim = 3; break;
  }
  if (z.size() != dim || noise.rows() != dim || noise.cols() != dim) {
    throw DomainError("measurement dimension does not match model");
  }

  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, 5);
  Eigen::VectorXd innovation(dim);
  switch (model) {
    case MeasurementModel::kScanMatchTwist:
      h(0, 3) = 1.0;
      h(1, 4) = 1.0;
      innovation << z(0) - state.mean(3), z(1) - state.mean(4);
      break;
    case MeasurementModel::kImuYawRate:
      h(0, 4) = 1.0;
      innovation << z(0) - state.mean(4);
      break;
    case MeasurementModel::kMclPose:
      h(0, 0) = 1.0;
      h(1, 1) = 1.0;
      h(2, 2) = 1.0;
      innovation << z(0) - state.mean(0), z(1) - state.mean(1),
          wrap_angle(z(2) - state.mean(2));
      break;
  }

  const Eigen::MatrixXd s = h * state.covariance * h.transpose() + noise;
  const Eigen::LDLT<Eigen::MatrixXd> solver(s);

  EkfUpdateResult result;
  result.mahalanobis_sq = innovation.dot(solver.solve(innovation));
  if (!(result.mahalanobis_sq <= kGate[dim])) {
    result.state = state;
    result.accepted = false;
    return result;
  }

  const Eigen::MatrixXd gain = state.covariance * h.transpose() * solver.solve(
      Eigen::MatrixXd::Identity(dim, dim));

  result.state = state;
  result.state.mean += gain * innovation;
  result.state.mean(2) = wrap_angle(result.state.mean(2));

  const Eigen::Matrix<double, 5, 5> left =
      Eigen::Matrix<double, 5, 5>::Identity() - gain * h;
  result.state.covariance = left * state.covariance * left.transpose() +
                            gain * noise * gain.transpose();
  symmetrize(result.state.covariance);
  result.accepted = true;
  return result;
}

}  // namespace navcore
