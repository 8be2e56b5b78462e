#include <algorithm>
#include <cmath>
#include <ostream>

#include "ppt/envs.hpp"
#include "ppt/errors.hpp"

namespace ppt::envs {

std::string to_string(TaskId id) {
  return id == TaskId::Pushing ? "pushing" : "maze";
}

TaskId task_from_string(const std::string& name) {
  if (name == "pushing") return TaskId::Pushing;
  if (name == "maze") return TaskId::Maze;
  throw InvalidInput("unknown task: " + name);
}

void TaskConfig::validate() const {
  if (!(dt > 0.0)) throw InvalidInput("task: dt must be > 0");
  if (!(horizon > dt)) throw InvalidInput("task: horizon must exceed dt");
  if (!(power_budget > 0.0)) throw InvalidInput("task: power budget must be > 0");
  if (friction_lo > friction_hi || friction_lo < 0.0)
    throw InvalidInput("task: friction range ill-ordered");
  if (corridor_width_lo > corridor_width_hi)
    throw InvalidInput("task: corridor width range ill-ordered");
  if (turn_lo > turn_hi) throw InvalidInput("task: turn angle range ill-ordered");
  if (mass_jitter < 0.0 || mass_jitter >= 1.0)
    throw InvalidInput("task: mass jitter must lie in [0,1)");
  if (box_edges.size() != box_masses.size() || box_edges.empty())
    throw InvalidInput("task: box edge/mass lists must align");
  if (!(tool.mass > 0.0) || !(tool.inertia > 0.0))
    throw InvalidInput("task: tool mass/inertia must be > 0");
  if (!(contact.normal_stiffness > 0.0))
    throw InvalidInput("task: contact stiffness must be > 0");
}

Env::Env(TaskConfig cfg) : config_(std::move(cfg)) { config_.validate(); }

Vector6d Env::clamp_wrench(const Vector6d& wrench) const {
  Vector6d out = wrench;
  const double f_norm = out.head<3>().norm();
  if (f_norm > config_.tool.force_cap) out.head<3>() *= config_.tool.force_cap / f_norm;
  const double t_norm = out.tail<3>().norm();
  if (t_norm > config_.tool.torque_cap) out.tail<3>() *= config_.tool.torque_cap / t_norm;
  return out;
}

Vector6d Env::servo_wrench(const Eigen::Vector4d& velocity_cmd) const {
  Vector6d wrench = Vector6d::Zero();
  wrench.head<3>() =
      config_.tool.servo_gain * (velocity_cmd.head<3>() - state_.tool_velocity);
  wrench[5] = config_.tool.servo_gain_rot * (velocity_cmd[3] - state_.tool_yaw_rate);
  return wrench;
}

impedance::Twist Env::measured_twist() const {
  impedance::Twist twist;
  twist.linear = state_.tool_velocity;
  twist.angular = Eigen::Vector3d(0.0, 0.0, state_.tool_yaw_rate);
  return twist;
}

Vector6d Env::command_to_wrench(const Command& cmd) const {
  if (cmd.mode == CommandMode::Wrench) {
    if (!cmd.wrench.allFinite()) throw InvalidInput("step: non-finite wrench command");
    return clamp_wrench(cmd.wrench);
  }
  if (!cmd.velocity.allFinite()) throw InvalidInput("step: non-finite velocity command");
  return clamp_wrench(servo_wrench(cmd.velocity));
}

void Env::integrate_tool(const Vector6d& applied_wrench) {
  const double dt = config_.dt;
  const double m = config_.tool.mass;
  const double inertia = config_.tool.inertia;

  // damping handled with the trapezoid (midpoint-velocity) rule so that the
  // discrete work-energy ledger closes exactly:
  //   m (v' - v) = dt (F - c (v + v')/2)
  const double a_lin = config_.tool.damping * dt / (2.0 * m);
  Eigen::Vector3d velocity =
      ((1.0 - a_lin) * state_.tool_velocity + (dt / m) * applied_wrench.head<3>()) /
      (1.0 + a_lin);
  const double speed = velocity.norm();
  if (speed > config_.tool.speed_cap) velocity *= config_.tool.speed_cap / speed;

  const double a_rot = config_.tool.rot_damping * dt / (2.0 * inertia);
  double yaw_rate =
      ((1.0 - a_rot) * state_.tool_yaw_rate + (dt / inertia) * applied_wrench[5]) /
      (1.0 + a_rot);
  yaw_rate = std::clamp(yaw_rate, -config_.tool.yaw_rate_cap, config_.tool.yaw_rate_cap);

  state_.tool_velocity = velocity;
  state_.tool_position += dt * velocity;
  state_.tool_yaw_rate = yaw_rate;
  state_.tool_yaw += dt * yaw_rate;
}

void Env::check_finite() const {
  if (!state_.tool_position.allFinite() || !state_.tool_velocity.allFinite() ||
      !std::isfinite(state_.tool_yaw) || !std::isfinite(state_.tool_yaw_rate))
    throw SimulationDiverged("tool state became non-finite");
}

void write_contact_log_csv(const ContactLog& log, std::ostream& out) {
  out.precision(17);
  out << "t,phase,x,y,z,nx,ny,nz,force,in_contact\n";
  for (const auto& row : log) {
    out << row.t << ',' << row.phase << ',' << row.position.x() << ','
        << row.position.y() << ',' << row.position.z() << ',' << row.normal.x() << ','
        << row.normal.y() << ',' << row.normal.z() << ',' << row.force << ','
        << (row.in_contact ? 1 : 0) << '\n';
  }
}

std::unique_ptr<Env> make_env(const TaskConfig& cfg) {
  if (cfg.task == TaskId::Pushing) return std::make_unique<PushingEnv>(cfg);
  return std::make_unique<MazeEnv>(cfg);
}

}  // namespace ppt::envs
