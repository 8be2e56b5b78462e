#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <limits>
#include <utility>
#include <vector>

namespace ppt::tank {

using Vector6d = Eigen::Matrix<double, 6, 1>;

// Budgets for the passivity layer. An "infinite" budget (disabled tank)
// uses the +inf sentinels so that the gate is identically 1.
struct TankConfig {
  double energy_max = 10.0;    // E_max [J]
  double energy_init = 10.0;   // E_0 [J], in [0, E_max]
  double power_max = 5.0;      // P_max [W]
  double power_floor = 1e-6;   // small positive floor in the gate denominator [W]
  double refill = 0.0;         // energy added back per step [J]
  double dt = 0.01;            // control step [s]

  static TankConfig disabled(double dt_step) {
    TankConfig cfg;
    cfg.energy_max = std::numeric_limits<double>::infinity();
    cfg.energy_init = std::numeric_limits<double>::infinity();
    cfg.power_max = std::numeric_limits<double>::infinity();
    cfg.dt = dt_step;
    return cfg;
  }

  bool enabled() const { return std::isfinite(power_max) || std::isfinite(energy_max); }

  void validate() const;  // throws InvalidInput
};

struct TankState {
  double energy = 0.0;               // E_t [J]
  double last_gamma = 1.0;           // scaling factor applied at the last step
  double cumulative_injected = 0.0;  // sum of gamma*p*dt over the episode [J]

  static TankState initial(const TankConfig& cfg) {
    return TankState{cfg.energy_init, 1.0, 0.0};
  }
};

// Returns (P, p) with P the signed dot product of nominal wrench and measured
// twist and p = |P|.
std::pair<double, double> instantaneous_power(const Vector6d& wrench_nominal,
                                              const Vector6d& twist);

// gamma = min(1, P_max / max(eps, p), (E + refill) / (dt * max(eps, p))).
double gate(const TankConfig& cfg, const TankState& state, double power_mag);

// One tank update: computes p, gates, debits gamma*p*dt, applies refill and
// the [0, E_max] clamp. The caller applies u = gamma * u_nominal.
std::pair<double, TankState> step(const TankConfig& cfg, const TankState& state,
                                  const Vector6d& wrench_nominal,
                                  const Vector6d& twist);

// Same update when the caller already has the power magnitude (velocity-gated
// variants compute p from the servo wrench).
std::pair<double, TankState> step_with_power(const TankConfig& cfg,
                                             const TankState& state,
                                             double power_mag);

Eigen::VectorXd scale_command(double gamma, const Eigen::VectorXd& u_nominal);

// Per-step trace row for the power/energy plots.
struct TraceRow {
  double t;
  double power_mag;
  double gamma;
  double energy;
};

void write_trace_csv(const std::vector<TraceRow>& rows, std::ostream& out);

}  // namespace ppt::tank
