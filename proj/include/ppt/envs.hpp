#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ppt/impedance.hpp"
#include "ppt/promp.hpp"
#include "ppt/rng.hpp"

namespace ppt::envs {

using Vector6d = Eigen::Matrix<double, 6, 1>;

enum class TaskId { Pushing, Maze };
enum class CommandMode { Wrench, Velocity };

std::string to_string(TaskId id);
TaskId task_from_string(const std::string& name);

// Already-gated command plus the bookkeeping the reward and logs need.
struct Command {
  CommandMode mode = CommandMode::Wrench;
  Vector6d wrench = Vector6d::Zero();              // wrench mode
  Eigen::Vector4d velocity = Eigen::Vector4d::Zero();  // [vx vy vz yaw_rate]
  double nominal_power = 0.0;  // pre-gate power p_t of the gated channel
  double gamma = 1.0;          // gate that was applied
};

struct ContactParams {
  double normal_stiffness = 5000.0;  // N/m
  double normal_damping = 50.0;      // N s/m
  double friction_kinetic = 0.30;    // tool-surface Coulomb coefficient
  double friction_static_ratio = 1.25;
  double tanh_velocity_scale = 1e-3;  // m/s

  double friction_static() const { return friction_static_ratio * friction_kinetic; }
};

struct ToolParams {
  double mass = 1.0;          // kg
  double damping = 5.0;       // N s/m viscous
  double inertia = 0.01;      // kg m^2 about z
  double rot_damping = 0.05;  // N m s
  double radius = 0.01;       // contact disc radius, m
  double force_cap = 30.0;    // commanded force clamp, N
  double torque_cap = 5.0;    // commanded torque clamp, N m
  double speed_cap = 0.8;     // actuator velocity limit, m/s
  double yaw_rate_cap = 2.0;  // rad/s
  double servo_gain = 40.0;       // velocity-mode servo, N s/m
  double servo_gain_rot = 0.5;    // N m s
};

struct RewardWeights {
  double goal = 20.0;          // per meter of goal-distance reduction
  double goal_bonus = 5.0;     // one-time on entering the goal set
  double path = 0.02;          // per-step bonus for staying near the task path
  double path_scale = 0.05;    // m
  double contact = 0.02;       // per-step contact bonus (maze)
  double energy = 0.02;        // weight of the power term
  double energy_alpha = 0.05;  // proportional power penalty inside the budget
};

struct TaskConfig {
  TaskId task = TaskId::Pushing;
  double horizon = 10.0;  // s
  double dt = 0.01;       // s
  double power_budget = 5.0;         // W, reward shaping + safety cut reference
  double safety_power_factor = 3.0;  // terminate when gamma*p exceeds factor * budget
  bool privileged_observation = true;

  // pushing randomization
  double friction_lo = 0.20;
  double friction_hi = 0.60;
  double mass_jitter = 0.15;
  std::vector<double> box_edges = {0.06, 0.08};
  std::vector<double> box_masses = {0.050, 0.080};
  double box_start_x = 0.12;
  double box_start_jitter = 0.01;
  double box_yaw_jitter = 0.09;  // rad
  double goal_distance_lo = 0.15;
  double goal_distance_hi = 0.20;
  double goal_bearing_max = 0.44;  // rad (~25 deg)
  double push_height = 0.03;
  double success_pos_tol = 0.02;
  double success_yaw_tol = 0.2618;  // 15 deg

  // maze geometry and randomization
  double corridor_width_lo = 0.05;
  double corridor_width_hi = 0.06;
  double turn_lo = 0.349;  // 20 deg
  double turn_hi = 0.785;  // 45 deg
  double undulation_max = 0.04;  // m, peak height variation
  double maze_length = 1.0;      // m
  bool maze_with_bend = false;   // straight corridors when false (training)
  bool maze_with_disc = false;   // optional arc segment on eval mazes
  bool maze_undulation = false;
  double heading_jitter = 0.10;  // rad, start-yaw randomization
  double wall_friction_lo = 0.20;
  double wall_friction_hi = 0.40;
  double maze_success_tol = 0.03;

  ContactParams contact;
  ToolParams tool;
  RewardWeights reward;

  void validate() const;
};

struct BoxState {
  Eigen::Vector2d position = Eigen::Vector2d::Zero();
  double yaw = 0.0;
};

struct SimState {
  Eigen::Vector3d tool_position = Eigen::Vector3d::Zero();
  Eigen::Vector3d tool_velocity = Eigen::Vector3d::Zero();
  double tool_yaw = 0.0;
  double tool_yaw_rate = 0.0;
  BoxState box;  // pushing task only
  double time = 0.0;
  double phase = 0.0;
  bool frozen = false;  // set once the goal set absorbs the state
};

struct ContactSnapshot {
  bool in_contact = false;
  Eigen::Vector3d force = Eigen::Vector3d::Zero();   // on the tool
  Eigen::Vector3d normal = Eigen::Vector3d::Zero();  // unit, surface -> tool
  double normal_force = 0.0;
  double tangential_force = 0.0;
  Eigen::Vector3d point = Eigen::Vector3d::Zero();
};

struct StepResult {
  Eigen::VectorXd observation;
  double reward = 0.0;
  bool done = false;
  bool success = false;
  double progress = 0.0;  // running max
  double distance_to_goal = 0.0;
  ContactSnapshot contact;
};

struct ContactLogRow {
  double t = 0.0;
  double phase = 0.0;
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  Eigen::Vector3d normal = Eigen::Vector3d::Zero();
  double force = 0.0;
  bool in_contact = false;
};
using ContactLog = std::vector<ContactLogRow>;

void write_contact_log_csv(const ContactLog& log, std::ostream& out);

// --- maze geometry ------------------------------------------------------------

struct MazeGeometry {
  std::vector<Eigen::Vector2d> vertices;  // centerline polyline
  double width = 0.055;
  double undulation_amplitude = 0.0;   // peak floor height, m
  double undulation_wavelength = 0.5;  // m

  struct Projection {
    double arclength = 0.0;
    double lateral = 0.0;                // signed, +left of travel
    Eigen::Vector2d tangent = Eigen::Vector2d::UnitX();
    Eigen::Vector2d closest = Eigen::Vector2d::Zero();
  };

  double total_length() const;
  Projection project(const Eigen::Vector2d& point) const;
  Eigen::Vector2d point_at(double arclength) const;
  double floor_height(double arclength) const;
  double initial_heading() const;

  std::string to_json() const;
  static MazeGeometry from_json(const std::string& text);
  void validate() const;
};

// Seeded generator; straight corridor unless the config asks for a bend,
// an arc segment, or vertical undulation.
MazeGeometry generate_maze(const TaskConfig& cfg, Rng& rng);

// --- environments ---------------------------------------------------------------

class Env {
 public:
  explicit Env(TaskConfig cfg);
  virtual ~Env() = default;

  const TaskConfig& config() const { return config_; }
  const SimState& state() const { return state_; }
  const ContactLog& contact_log() const { return contact_log_; }
  double progress() const { return progress_; }
  Eigen::Vector3d goal_position() const { return goal_; }
  Eigen::Vector3d start_position() const { return start_; }

  virtual Eigen::VectorXd reset(std::uint64_t seed) = 0;
  virtual StepResult step(const Command& cmd) = 0;
  virtual int observation_dim() const = 0;

  // wrench the internal velocity servo would exert for a (nominal) command;
  // the tank meters this against the measured twist
  Vector6d servo_wrench(const Eigen::Vector4d& velocity_cmd) const;
  impedance::Twist measured_twist() const;

 protected:
  // shared point-mass integration; contact forces and commanded wrench in,
  // trapezoid-damped semi-implicit Euler out
  void integrate_tool(const Vector6d& applied_wrench);
  Vector6d clamp_wrench(const Vector6d& wrench) const;
  Vector6d command_to_wrench(const Command& cmd) const;
  void check_finite() const;

  TaskConfig config_;
  SimState state_;
  ContactLog contact_log_;
  double progress_ = 0.0;
  Eigen::Vector3d start_ = Eigen::Vector3d::Zero();
  Eigen::Vector3d goal_ = Eigen::Vector3d::Zero();
};

class PushingEnv : public Env {
 public:
  explicit PushingEnv(TaskConfig cfg);

  Eigen::VectorXd reset(std::uint64_t seed) override;
  StepResult step(const Command& cmd) override;
  int observation_dim() const override { return 24; }

  // per-episode samples, exposed for tests and logs
  double sampled_friction() const { return table_friction_kinetic_; }
  double sampled_box_mass() const { return box_mass_; }
  double sampled_box_edge() const { return box_edge_; }
  BoxState box() const { return state_.box; }
  double box_goal_yaw() const { return goal_yaw_; }

 private:
  Eigen::VectorXd observation(const ContactSnapshot& contact) const;
  ContactSnapshot box_contact() const;
  double goal_distance() const;
  bool in_goal() const;

  double box_edge_ = 0.06;
  double box_mass_ = 0.05;
  double table_friction_kinetic_ = 0.4;
  double table_friction_static_ = 0.5;
  double goal_yaw_ = 0.0;
  Eigen::Vector2d box_twist_ = Eigen::Vector2d::Zero();  // last quasi-static velocity
  double box_yaw_rate_ = 0.0;
  double box_mobility_ = 50.0;       // N s/m
  double box_char_len_factor_ = 0.38;
  double prev_goal_distance_ = 0.0;
  bool goal_bonus_granted_ = false;
};

class MazeEnv : public Env {
 public:
  explicit MazeEnv(TaskConfig cfg);

  Eigen::VectorXd reset(std::uint64_t seed) override;
  StepResult step(const Command& cmd) override;
  int observation_dim() const override { return 21; }

  const MazeGeometry& maze() const { return maze_; }
  // pin the geometry for the next reset (shareable evaluation sets)
  void set_maze(MazeGeometry geometry);
  double arclength() const;

 private:
  Eigen::VectorXd observation(const ContactSnapshot& contact) const;
  ContactSnapshot wall_floor_contact() const;
  double goal_distance() const;

  MazeGeometry maze_;
  bool maze_pinned_ = false;
  double wall_friction_ = 0.3;
  double prev_goal_distance_ = 0.0;
  bool goal_bonus_granted_ = false;
};

std::unique_ptr<Env> make_env(const TaskConfig& cfg);

// --- contact-inferred waypoints ---------------------------------------------------

struct WaypointParams {
  double min_force = 0.2;         // N, below this a sample does not count as contact
  int min_cluster_steps = 10;     // sustained-contact requirement
  int max_gap_steps = 25;         // contact gap that still continues a cluster
  double turn_threshold = 0.21;   // rad (~12 deg) normal rotation between clusters
  double spread_floor = 1e-6;     // m^2 added to the via-point covariance
};

struct ContactCluster {
  int first_index = 0;
  int last_index = 0;
  Eigen::Vector3d mean_normal = Eigen::Vector3d::Zero();
  Eigen::Vector3d exit_position = Eigen::Vector3d::Zero();
  double exit_phase = 0.0;
  Eigen::Matrix3d position_spread = Eigen::Matrix3d::Zero();
};

// Sustained-contact clusters segmented where the (running mean) contact
// normal rotates beyond the turn threshold.
std::vector<ContactCluster> analyze_contact_log(const ContactLog& log,
                                                const WaypointParams& params = {});

// Via-points at the exits of clusters whose successor's mean normal has
// rotated beyond the threshold; targets are the first `dims` position
// components, covariances from the cluster spread.
promp::ViaPointSet infer_waypoints(const ContactLog& log, int dims,
                                   const WaypointParams& params = {});

}  // namespace ppt::envs
