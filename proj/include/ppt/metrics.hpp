#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace ppt::metrics {

// One evaluation episode, uniform dt, monotone t.
struct EpisodeLog {
  double dt = 0.01;
  double horizon = 0.0;
  std::vector<double> t;
  std::vector<Eigen::Vector3d> tool_position;
  std::vector<double> wrench_norm;
  std::vector<double> power;          // gated-channel power gamma*p per step
  std::vector<double> power_nominal;  // pre-gate power p per step
  std::vector<double> gamma;
  std::vector<std::uint8_t> contact;
  std::vector<double> progress;
  bool success = false;
};

struct EpisodeMetrics {
  double max_power = 0.0;
  bool success = false;
  double jerk_rms = 0.0;
  double peak_wrench_p95 = 0.0;
  double overload_ratio = 0.0;
  double contact_continuity = 0.0;
  double progress_at_horizon = 0.0;
};

// RMS of the jerk-vector norm from third-order finite differences of the
// position series (central stencils inside, one-sided at the boundaries).
// Needs at least 4 samples.
double jerk_rms(const std::vector<Eigen::Vector3d>& positions, double dt);

// Percentile with linear interpolation between closest ranks (q in [0,100]).
double percentile(std::vector<double> values, double q);

double peak_wrench_p95(const std::vector<double>& wrench_norms);

// Fraction of samples with power strictly above the budget.
double overload_ratio(const std::vector<double>& powers, double power_max);

enum class ContinuityMode {
  LongestRun,   // longest contiguous contact run / total in-contact steps
  MeanSegment,  // mean contact-segment length / total in-contact steps
};

double contact_continuity(const std::vector<std::uint8_t>& contact_flags,
                          ContinuityMode mode = ContinuityMode::LongestRun);

// Final value of the running-max progress fraction, clipped to [0,1].
double progress_at_horizon(const std::vector<double>& progress_series);

EpisodeMetrics compute(const EpisodeLog& log, double power_max);

struct Aggregate {
  double mean = 0.0;
  double standard_error = 0.0;
  int count = 0;
};

Aggregate aggregate(const std::vector<double>& values);

// Moving average over a trailing window; used only for plotted curves.
std::vector<double> moving_average(const std::vector<double>& series, int window);

}  // namespace ppt::metrics
