#ifndef NAVCORE_EKF_HPP
#define NAVCORE_EKF_HPP

#include <Eigen/Dense>

#include "navcore/types.hpp"

namespace navcore {

// Fused odometry filter over (x, y, theta, v, omega).
struct EkfState {
  Eigen::Matrix<double, 5, 1> mean = Eigen::Matrix<double, 5, 1>::Zero();
  Eigen::Matrix<double, 5, 5> covariance = Eigen::Matrix<double, 5, 5>::Zero();

  Pose2D pose() const { return {mean(0), mean(1), mean(2)}; }
  Twist2D twist() const { return {mean(3), mean(4)}; }
};

EkfState ekf_init(const Pose2D& pose, const Eigen::Matrix<double, 5, 5>& covariance);

// Constant-velocity unicycle prediction: pose advances along the arc of
// (v, omega); covariance propagates through the analytic Jacobian plus
// process noise scaled by dt.
EkfState ekf_predict(const EkfState& state, double dt,
                     const Eigen::Matrix<double, 5, 5>& process_noise);

enum class MeasurementModel {
  kScanMatchTwist,  // z = (v, omega)
  kImuYawRate,      // z = (omega)
  kMclPose,         // z = (x, y, theta), innovation theta wrapped
};

struct EkfUpdateResult {
  EkfState state;
  bool accepted = false;
  double mahalanobis_sq = 0.0;
};

// Joseph-form EKF correction with a chi-square 99.9% innovation gate per
// measurement dimension; gated-out measurements leave the state untouched.
EkfUpdateResult ekf_update(const EkfState& state, const Eigen::VectorXd& z,
                           MeasurementModel model, const Eigen::MatrixXd& noise);

// Analytic Jacobian of the prediction map, exposed for verification.
Eigen::Matrix<double, 5, 5> ekf_motion_jacobian(const EkfState& state, double dt);

}  // namespace navcore

#endif  // NAVCORE_EKF_HPP
