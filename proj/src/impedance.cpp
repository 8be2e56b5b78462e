#include "ppt/impedance.hpp"

#include <cmath>

#include "ppt/errors.hpp"

namespace ppt::impedance {

namespace {

bool is_spd(const Eigen::Matrix3d& m) {
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-9) return false;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(m);
  return es.info() == Eigen::Success && es.eigenvalues().minCoeff() > 0.0;
}

}  // namespace

void validate_rotation(const Eigen::Matrix3d& rotation, double tol) {
  if (!rotation.allFinite()) throw InvalidRotation("rotation has non-finite entries");
  const Eigen::Matrix3d gram = rotation.transpose() * rotation;
  if ((gram - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() > tol)
    throw InvalidRotation("matrix is not orthonormal");
  if (std::abs(rotation.determinant() - 1.0) > tol)
    throw InvalidRotation("matrix determinant is not +1");
}

void PoseTarget::validate() const { validate_rotation(rotation); }

ImpedanceGains ImpedanceGains::diagonal(const Eigen::Vector3d& kp,
                                        const Eigen::Vector3d& kd,
                                        const Eigen::Vector3d& kp_rot,
                                        const Eigen::Vector3d& kd_rot) {
  ImpedanceGains g;
  g.stiffness = kp.asDiagonal();
  g.damping = kd.asDiagonal();
  g.rot_stiffness = kp_rot.asDiagonal();
  g.rot_damping = kd_rot.asDiagonal();
  g.validate();
  return g;
}

void ImpedanceGains::validate() const {
  if (!is_spd(stiffness) || !is_spd(damping) || !is_spd(rot_stiffness) ||
      !is_spd(rot_damping))
    throw InvalidInput("impedance gains must be symmetric positive definite");
}

Eigen::Matrix3d skew(const Eigen::Vector3d& w) {
  Eigen::Matrix3d s;
  s << 0.0, -w.z(), w.y(), w.z(), 0.0, -w.x(), -w.y(), w.x(), 0.0;
  return s;
}

Eigen::Vector3d orientation_error(const Eigen::Matrix3d& rotation_desired,
                                  const Eigen::Matrix3d& rotation) {
  validate_rotation(rotation_desired);
  validate_rotation(rotation);
  const Eigen::Matrix3d half_diff =
      0.5 * (rotation_desired.transpose() * rotation -
             rotation.transpose() * rotation_desired);
  return {half_diff(2, 1), half_diff(0, 2), half_diff(1, 0)};
}

Vector6d compute_wrench(const ImpedanceGains& gains, const PoseTarget& target,
                        const Pose& current, const Twist& twist) {
  const Eigen::Vector3d position_error = target.position - current.position;
  const Eigen::Vector3d velocity_error = target.linear_velocity - twist.linear;
  // orientation_error(R, Rd) = -orientation_error(Rd, R); this order points
  // from the current rotation toward the target.
  const Eigen::Vector3d rot_error = orientation_error(current.rotation, target.rotation);
  const Eigen::Vector3d ang_velocity_error = target.angular_velocity - twist.angular;

  Vector6d wrench;
  wrench.head<3>() = gains.stiffness * position_error + gains.damping * velocity_error;
  wrench.tail<3>() = gains.rot_stiffness * rot_error + gains.rot_damping * ang_velocity_error;
  return wrench;
}

Eigen::Matrix3d yaw_rotation(double yaw) {
  const double c = std::cos(yaw);
  const double s = std::sin(yaw);
  Eigen::Matrix3d r;
  r << c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0;
  return r;
}

}  // namespace ppt::impedance
