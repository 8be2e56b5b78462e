#include "ppt/energy_tank.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "ppt/errors.hpp"

namespace ppt::tank {

void TankConfig::validate() const {
  if (!(energy_max > 0.0)) throw InvalidInput("tank: energy_max must be > 0");
  if (!(power_max > 0.0)) throw InvalidInput("tank: power_max must be > 0");
  if (!(power_floor > 0.0)) throw InvalidInput("tank: power_floor must be > 0");
  if (!(dt > 0.0)) throw InvalidInput("tank: dt must be > 0");
  if (refill < 0.0) throw InvalidInput("tank: refill must be >= 0");
  if (energy_init < 0.0 || energy_init > energy_max)
    throw InvalidInput("tank: energy_init must lie in [0, energy_max]");
}

std::pair<double, double> instantaneous_power(const Vector6d& wrench_nominal,
                                              const Vector6d& twist) {
  if (!wrench_nominal.allFinite() || !twist.allFinite())
    throw InvalidInput("instantaneous_power: non-finite input");
  const double signed_power = wrench_nominal.dot(twist);
  return {signed_power, std::abs(signed_power)};
}

double gate(const TankConfig& cfg, const TankState& state, double power_mag) {
  const double p = std::max(cfg.power_floor, power_mag);
  const double by_power = cfg.power_max / p;
  const double by_energy = (state.energy + cfg.refill) / (cfg.dt * p);
  return std::min({1.0, by_power, by_energy});
}

std::pair<double, TankState> step_with_power(const TankConfig& cfg,
                                             const TankState& state,
                                             double power_mag) {
  const double gamma = gate(cfg, state, power_mag);
  const double debit = gamma * power_mag * cfg.dt;

  TankState next = state;
  next.energy = std::min(cfg.energy_max, std::max(0.0, state.energy - debit + cfg.refill));
  next.last_gamma = gamma;
  next.cumulative_injected = state.cumulative_injected + debit;
  return {gamma, next};
}

std::pair<double, TankState> step(const TankConfig& cfg, const TankState& state,
                                  const Vector6d& wrench_nominal,
                                  const Vector6d& twist) {
  const auto [signed_power, power_mag] = instantaneous_power(wrench_nominal, twist);
  (void)signed_power;
  return step_with_power(cfg, state, power_mag);
}

Eigen::VectorXd scale_command(double gamma, const Eigen::VectorXd& u_nominal) {
  if (gamma < 0.0 || gamma > 1.0)
    throw InvalidInput("scale_command: gamma must lie in [0,1]");
  return gamma * u_nominal;
}

void write_trace_csv(const std::vector<TraceRow>& rows, std::ostream& out) {
  out.precision(17);
  out << "t,p,gamma,E\n";
  for (const auto& r : rows)
    out << r.t << ',' << r.power_mag << ',' << r.gamma << ',' << r.energy << '\n';
}

}  // namespace ppt::tank
