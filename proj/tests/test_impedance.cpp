#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ppt/errors.hpp"
#include "ppt/impedance.hpp"
#include "ppt/rng.hpp"

using namespace ppt;
using namespace ppt::impedance;

namespace {

Eigen::Matrix3d axis_angle(const Eigen::Vector3d& axis, double angle) {
  return Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix();
}

Eigen::Matrix3d random_rotation(Rng& rng) {
  Eigen::Vector3d axis(rng.normal(), rng.normal(), rng.normal());
  return axis_angle(axis, rng.uniform(-M_PI, M_PI));
}

Eigen::Matrix3d random_spd3(Rng& rng) {
  Eigen::Matrix3d a;
  for (int i = 0; i < 9; ++i) a(i) = rng.normal();
  return a * a.transpose() + 0.5 * Eigen::Matrix3d::Identity();
}

// Direct numeric evaluation of the half-difference formula, written out
// element by element, independent of the library routine.
Eigen::Vector3d orientation_error_by_hand(const Eigen::Matrix3d& rd,
                                          const Eigen::Matrix3d& r) {
  Eigen::Matrix3d s = Eigen::Matrix3d::Zero();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double acc = 0.0;
      for (int k = 0; k < 3; ++k) acc += rd(k, i) * r(k, j) - r(k, i) * rd(k, j);
      s(i, j) = 0.5 * acc;
    }
  return {s(2, 1), s(0, 2), s(1, 0)};
}

}  // namespace

TEST_CASE("orientation error vanishes for identical rotations") {
  Rng rng(1);
  for (int i = 0; i < 10; ++i) {
    const Eigen::Matrix3d r = random_rotation(rng);
    CHECK(orientation_error(r, r).norm() < 1e-14);
  }
}

TEST_CASE("orientation error for a yaw offset matches the direct evaluation") {
  const Eigen::Matrix3d rd = yaw_rotation(0.3);
  const Eigen::Matrix3d r = Eigen::Matrix3d::Identity();
  const Eigen::Vector3d e = orientation_error(rd, r);
  const Eigen::Vector3d expected = orientation_error_by_hand(rd, r);
  CHECK((e - expected).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(std::abs(e.z()) == doctest::Approx(std::sin(0.3)).epsilon(1e-12));
  CHECK(std::abs(e.x()) < 1e-14);
  CHECK(std::abs(e.y()) < 1e-14);
}

TEST_CASE("orientation error is antisymmetric in its arguments") {
  Rng rng(2);
  for (int i = 0; i < 20; ++i) {
    const Eigen::Matrix3d a = random_rotation(rng);
    const Eigen::Matrix3d b = random_rotation(rng);
    CHECK((orientation_error(a, b) + orientation_error(b, a)).norm() < 1e-12);
  }
}

TEST_CASE("orientation error is zero exactly when Rd^T R is symmetric") {
  Rng rng(3);
  for (int i = 0; i < 30; ++i) {
    const Eigen::Matrix3d rd = random_rotation(rng);
    const Eigen::Matrix3d r = random_rotation(rng);
    const Eigen::Matrix3d rel = rd.transpose() * r;
    const bool symmetric = (rel - rel.transpose()).cwiseAbs().maxCoeff() < 1e-12;
    const bool zero_error = orientation_error(rd, r).norm() < 1e-12;
    CHECK(symmetric == zero_error);
  }
  // a 180-degree relative rotation is symmetric without being the identity
  const Eigen::Matrix3d rd = Eigen::Matrix3d::Identity();
  const Eigen::Matrix3d r = axis_angle(Eigen::Vector3d::UnitX(), M_PI);
  CHECK(orientation_error(rd, r).norm() < 1e-12);
}

TEST_CASE("non-orthonormal input is rejected") {
  Eigen::Matrix3d bad = Eigen::Matrix3d::Identity();
  bad(0, 0) = 1.1;
  CHECK_THROWS_AS(orientation_error(bad, Eigen::Matrix3d::Identity()), InvalidRotation);
  Eigen::Matrix3d reflection = Eigen::Matrix3d::Identity();
  reflection(2, 2) = -1.0;  // orthonormal but det = -1
  CHECK_THROWS_AS(orientation_error(reflection, Eigen::Matrix3d::Identity()),
                  InvalidRotation);
}

TEST_CASE("zero pose and twist error commands zero wrench") {
  const auto gains = ImpedanceGains::diagonal(
      Eigen::Vector3d::Constant(300.0), Eigen::Vector3d::Constant(30.0),
      Eigen::Vector3d::Constant(10.0), Eigen::Vector3d::Constant(1.0));
  PoseTarget target;
  target.position = Eigen::Vector3d(0.2, -0.1, 0.5);
  target.rotation = yaw_rotation(0.8);
  Pose current{target.position, target.rotation};
  Twist twist;
  CHECK(compute_wrench(gains, target, current, twist).norm() < 1e-14);
}

TEST_CASE("pure stiffness with a 1 cm error gives 1 N") {
  const auto gains = ImpedanceGains::diagonal(
      Eigen::Vector3d::Constant(100.0), Eigen::Vector3d::Constant(20.0),
      Eigen::Vector3d::Constant(5.0), Eigen::Vector3d::Constant(0.5));
  PoseTarget target;
  target.position = Eigen::Vector3d(0.01, 0.0, 0.0);
  Pose current;  // origin, identity
  Twist twist;   // zero velocity: damping terms contribute nothing
  const Vector6d wrench = compute_wrench(gains, target, current, twist);
  CHECK(wrench[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(wrench.tail<5>().norm() < 1e-14);
}

TEST_CASE("wrench matches an independent evaluation of the law") {
  Rng rng(4);
  for (int trial = 0; trial < 25; ++trial) {
    ImpedanceGains gains;
    gains.stiffness = random_spd3(rng);
    gains.damping = random_spd3(rng);
    gains.rot_stiffness = random_spd3(rng);
    gains.rot_damping = random_spd3(rng);

    PoseTarget target;
    target.position = Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal());
    target.rotation = random_rotation(rng);
    target.linear_velocity = Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal());
    target.angular_velocity = Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal());

    Pose current;
    current.position = Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal());
    current.rotation = random_rotation(rng);
    Twist twist;
    twist.linear = Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal());
    twist.angular = Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal());

    const Vector6d wrench = compute_wrench(gains, target, current, twist);

    const Eigen::Vector3d force_expected =
        gains.stiffness * (target.position - current.position) +
        gains.damping * (target.linear_velocity - twist.linear);
    const Eigen::Vector3d torque_expected =
        gains.rot_stiffness *
            orientation_error_by_hand(current.rotation, target.rotation) +
        gains.rot_damping * (target.angular_velocity - twist.angular);

    CHECK((wrench.head<3>() - force_expected).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((wrench.tail<3>() - torque_expected).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("wrench is linear in the pose and twist errors") {
  const auto gains = ImpedanceGains::diagonal(
      Eigen::Vector3d(120.0, 90.0, 150.0), Eigen::Vector3d(12.0, 9.0, 15.0),
      Eigen::Vector3d(8.0, 8.0, 8.0), Eigen::Vector3d(0.8, 0.8, 0.8));
  Rng rng(6);
  // keep rotations identical so the remaining map is linear
  for (int trial = 0; trial < 10; ++trial) {
    PoseTarget t1, t2;
    t1.position = Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal());
    t2.position = Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal());
    t1.linear_velocity = Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal());
    t2.linear_velocity = Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal());
    Pose current;
    Twist twist;

    PoseTarget sum = t1;
    sum.position += t2.position;
    sum.linear_velocity += t2.linear_velocity;

    const Vector6d lhs = compute_wrench(gains, sum, current, twist);
    const Vector6d rhs = compute_wrench(gains, t1, current, twist) +
                         compute_wrench(gains, t2, current, twist);
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("spring force has a non-negative component along the position error") {
  Rng rng(7);
  for (int trial = 0; trial < 30; ++trial) {
    ImpedanceGains gains;
    gains.stiffness = random_spd3(rng);
    gains.damping = 0.1 * Eigen::Matrix3d::Identity();
    gains.rot_stiffness = Eigen::Matrix3d::Identity();
    gains.rot_damping = 0.1 * Eigen::Matrix3d::Identity();

    PoseTarget target;
    target.position = Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal());
    Pose current;
    current.position = Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal());
    Twist twist;  // zero velocity: pure spring

    const Eigen::Vector3d error = target.position - current.position;
    const Vector6d wrench = compute_wrench(gains, target, current, twist);
    CHECK(wrench.head<3>().dot(error) >= 0.0);
  }
}

TEST_CASE("gains must be symmetric positive definite") {
  Eigen::Matrix3d not_spd = Eigen::Matrix3d::Identity();
  not_spd(0, 0) = -1.0;
  ImpedanceGains gains;
  gains.stiffness = not_spd;
  gains.damping = Eigen::Matrix3d::Identity();
  gains.rot_stiffness = Eigen::Matrix3d::Identity();
  gains.rot_damping = Eigen::Matrix3d::Identity();
  CHECK_THROWS_AS(gains.validate(), InvalidInput);
}
