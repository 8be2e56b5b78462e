#pragma once

#include <Eigen/Dense>

namespace ppt::impedance {

using Vector6d = Eigen::Matrix<double, 6, 1>;

struct Pose {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
};

// 6-D velocity, [linear; angular].
struct Twist {
  Eigen::Vector3d linear = Eigen::Vector3d::Zero();
  Eigen::Vector3d angular = Eigen::Vector3d::Zero();

  Vector6d vector() const {
    Vector6d v;
    v << linear, angular;
    return v;
  }
};

// Paired 6-D wrench command and measured twist; their dot product is the
// instantaneous mechanical power fed to the energy tank.
struct WrenchTwist {
  Vector6d wrench = Vector6d::Zero();  // [force; torque]
  Vector6d twist = Vector6d::Zero();   // [linear; angular]
};

struct PoseTarget {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d linear_velocity = Eigen::Vector3d::Zero();
  Eigen::Vector3d angular_velocity = Eigen::Vector3d::Zero();

  void validate() const;  // throws InvalidRotation
};

struct ImpedanceGains {
  Eigen::Matrix3d stiffness;      // K_p [N/m]
  Eigen::Matrix3d damping;        // K_d [N s/m]
  Eigen::Matrix3d rot_stiffness;  // K_{p,R} [N m/rad]
  Eigen::Matrix3d rot_damping;    // K_{d,R} [N m s/rad]

  static ImpedanceGains diagonal(const Eigen::Vector3d& kp, const Eigen::Vector3d& kd,
                                 const Eigen::Vector3d& kp_rot,
                                 const Eigen::Vector3d& kd_rot);

  void validate() const;  // throws InvalidInput unless all four are SPD
};

// Checks R^T R = I and det(R) = 1 within tol; throws InvalidRotation.
void validate_rotation(const Eigen::Matrix3d& rotation, double tol = 1e-9);

// vee-map of the skew-symmetric half-difference:
//   e = (1/2) * (Rd^T R - R^T Rd)^vee
// with vee(S) = [S(2,1), S(0,2), S(1,0)] so that skew(w) v = w x v.
Eigen::Vector3d orientation_error(const Eigen::Matrix3d& rotation_desired,
                                  const Eigen::Matrix3d& rotation);

// Cartesian impedance law. Force from position/velocity error, torque from
// the rotation error of the current frame relative to the target (the
// argument order that drives the rotation toward the target, consistent with
// e_x = x_d - x) plus the angular-velocity error, all in the world frame.
Vector6d compute_wrench(const ImpedanceGains& gains, const PoseTarget& target,
                        const Pose& current, const Twist& twist);

Eigen::Matrix3d yaw_rotation(double yaw);

Eigen::Matrix3d skew(const Eigen::Vector3d& w);

}  // namespace ppt::impedance
