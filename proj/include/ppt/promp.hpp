#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "ppt/rng.hpp"

namespace ppt::promp {

// Radial-basis layout over the phase interval [0,1].
struct BasisConfig {
  int num_basis = 0;     // K
  int num_dims = 0;      // d
  Eigen::VectorXd centers;  // strictly increasing, within [0,1]
  Eigen::VectorXd widths;   // positive
  bool normalize = true;

  // Uniform centers on [0,1] including the endpoints, widths proportional to
  // the spacing (width_scale defaults to 0.7).
  static BasisConfig uniform(int num_basis, int num_dims, double width_scale = 0.7,
                             bool normalize = true);

  int weight_dim() const { return num_basis * num_dims; }
  void validate() const;  // throws InvalidInput
};

// Gaussian over vectorized weights, laid out dimension-major: the K weights
// of dimension 0 first, then dimension 1, and so on.
struct WeightDistribution {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;

  void validate(double symmetry_tol = 1e-10, double psd_tol = 1e-10) const;
};

struct ViaPoint {
  double phase = 0.0;
  Eigen::VectorXd target;    // d-vector
  Eigen::MatrixXd noise;     // d x d SPD; empty -> default 1e-6 * I
};

using ViaPointSet = std::vector<ViaPoint>;

struct Trajectory {
  Eigen::VectorXd phases;                     // strictly increasing, first 0, last 1
  std::vector<Eigen::VectorXd> points;        // one d-vector per phase
  std::vector<Eigen::MatrixXd> point_covariance;  // optional, empty or same length

  void validate() const;
};

// Gaussian RBF activations at a phase, optionally normalized to sum 1.
Eigen::VectorXd basis_vector(const BasisConfig& config, double phase);

// y = Phi(phase)^T unvec(weights), per dimension.
Eigen::VectorXd decode(const BasisConfig& config, const Eigen::VectorXd& weights,
                       double phase);

// Mean and covariance of the decoded point at a phase.
std::pair<Eigen::VectorXd, Eigen::MatrixXd> decode_distribution(
    const BasisConfig& config, const WeightDistribution& dist, double phase);

// Per-demo ridge least squares on the basis matrix; mean and sample
// covariance across demos (ridge*I when fewer than two demos or the sample
// covariance is rank-deficient).
WeightDistribution fit_prior(const BasisConfig& config,
                             const std::vector<Trajectory>& demos,
                             double ridge = 1e-6);

// Gaussian posterior after observing the via-points through the stacked
// basis matrix. Solved via symmetric factorizations, no explicit inverses.
WeightDistribution condition(const WeightDistribution& dist, const BasisConfig& config,
                             const ViaPointSet& via_points);

// Draw w ~ N(mean, covariance) through a symmetric eigendecomposition factor;
// deterministic given the rng state.
Eigen::VectorXd sample_weights(const WeightDistribution& dist, Rng& rng);

// Decode the distribution on a uniform phase grid (with per-point covariance).
Trajectory decode_trajectory(const BasisConfig& config, const WeightDistribution& dist,
                             int num_points);

// --- serialization ---------------------------------------------------------
// JSON schema: {"K", "d", "centers", "widths", "normalize",
//               "mean", "cov_row_major"}
std::string promp_to_json(const BasisConfig& config, const WeightDistribution& dist);
std::pair<BasisConfig, WeightDistribution> promp_from_json(const std::string& text);

// CSV schema: phase,dim0,...,dimN
void write_trajectory_csv(const Trajectory& traj, std::ostream& out);
Trajectory read_trajectory_csv(std::istream& in);

}  // namespace ppt::promp
