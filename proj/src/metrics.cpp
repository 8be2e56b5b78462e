#include "ppt/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "ppt/errors.hpp"

namespace ppt::metrics {

namespace {

// Third derivative at index i. Interior points use the five-point central
// stencil; the first/last two points fall back to one-sided four-point
// stencils. Both are exact for cubics.
Eigen::Vector3d third_derivative(const std::vector<Eigen::Vector3d>& p, std::size_t i,
                                 double dt) {
  const double h3 = dt * dt * dt;
  const std::size_t n = p.size();
  if (i >= 2 && i + 2 < n) {
    return (-0.5 * p[i - 2] + p[i - 1] - p[i + 1] + 0.5 * p[i + 2]) / h3;
  }
  if (i + 3 < n) {
    return (-p[i] + 3.0 * p[i + 1] - 3.0 * p[i + 2] + p[i + 3]) / h3;
  }
  if (i >= 3) {
    return (p[i] - 3.0 * p[i - 1] + 3.0 * p[i - 2] - p[i - 3]) / h3;
  }
  // n == 4 middle points: only one 4-point stencil exists
  return (-p[0] + 3.0 * p[1] - 3.0 * p[2] + p[3]) / h3;
}

}  // namespace

double jerk_rms(const std::vector<Eigen::Vector3d>& positions, double dt) {
  if (positions.size() < 4) throw InvalidInput("jerk_rms: need at least 4 samples");
  if (!(dt > 0.0)) throw InvalidInput("jerk_rms: dt must be > 0");
  double sum_sq = 0.0;
  for (std::size_t i = 0; i < positions.size(); ++i)
    sum_sq += third_derivative(positions, i, dt).squaredNorm();
  return std::sqrt(sum_sq / static_cast<double>(positions.size()));
}

double percentile(std::vector<double> values, double q) {
  if (values.empty()) throw InvalidInput("percentile: empty input");
  if (q < 0.0 || q > 100.0) throw InvalidInput("percentile: q outside [0,100]");
  std::sort(values.begin(), values.end());
  const double pos = q / 100.0 * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = static_cast<std::size_t>(std::ceil(pos));
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

double peak_wrench_p95(const std::vector<double>& wrench_norms) {
  return percentile(wrench_norms, 95.0);
}

double overload_ratio(const std::vector<double>& powers, double power_max) {
  if (powers.empty()) throw InvalidInput("overload_ratio: empty input");
  const auto over = std::count_if(powers.begin(), powers.end(),
                                  [&](double p) { return p > power_max; });
  return static_cast<double>(over) / static_cast<double>(powers.size());
}

double contact_continuity(const std::vector<std::uint8_t>& contact_flags,
                          ContinuityMode mode) {
  long total = 0;
  long longest = 0;
  long current = 0;
  long segments = 0;
  for (auto f : contact_flags) {
    if (f) {
      ++total;
      ++current;
      longest = std::max(longest, current);
    } else {
      if (current > 0) ++segments;
      current = 0;
    }
  }
  if (current > 0) ++segments;
  if (total == 0) return 0.0;
  if (mode == ContinuityMode::LongestRun)
    return static_cast<double>(longest) / static_cast<double>(total);
  const double mean_segment = static_cast<double>(total) / static_cast<double>(segments);
  return mean_segment / static_cast<double>(total);
}

double progress_at_horizon(const std::vector<double>& progress_series) {
  double running_max = 0.0;
  for (double p : progress_series)
    running_max = std::max(running_max, std::clamp(p, 0.0, 1.0));
  return running_max;
}

EpisodeMetrics compute(const EpisodeLog& log, double power_max) {
  EpisodeMetrics m;
  m.success = log.success;
  if (!log.power.empty()) m.max_power = *std::max_element(log.power.begin(), log.power.end());
  if (log.tool_position.size() >= 4) m.jerk_rms = jerk_rms(log.tool_position, log.dt);
  if (!log.wrench_norm.empty()) m.peak_wrench_p95 = peak_wrench_p95(log.wrench_norm);
  if (!log.power.empty()) m.overload_ratio = overload_ratio(log.power, power_max);
  m.contact_continuity = contact_continuity(log.contact);
  m.progress_at_horizon = progress_at_horizon(log.progress);
  return m;
}

Aggregate aggregate(const std::vector<double>& values) {
  Aggregate a;
  a.count = static_cast<int>(values.size());
  if (values.empty()) return a;
  double sum = 0.0;
  for (double v : values) sum += v;
  a.mean = sum / a.count;
  if (a.count < 2) return a;
  double ss = 0.0;
  for (double v : values) ss += (v - a.mean) * (v - a.mean);
  const double stddev = std::sqrt(ss / (a.count - 1));
  a.standard_error = stddev / std::sqrt(static_cast<double>(a.count));
  return a;
}

std::vector<double> moving_average(const std::vector<double>& series, int window) {
  if (window < 1) throw InvalidInput("moving_average: window must be >= 1");
  std::vector<double> out(series.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < series.size(); ++i) {
    acc += series[i];
    if (i >= static_cast<std::size_t>(window)) acc -= series[i - window];
    const auto n = std::min<std::size_t>(i + 1, window);
    out[i] = acc / static_cast<double>(n);
  }
  return out;
}

}  // namespace ppt::metrics
