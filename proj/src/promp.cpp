#include "ppt/promp.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ppt/errors.hpp"

namespace ppt::promp {

namespace {

using json = nlohmann::json;

constexpr double kDefaultViaNoise = 1e-6;

// Jitter scale used ahead of factorizations: 1e-9 * trace(S)/n.
double jitter_for(const Eigen::MatrixXd& m) {
  return 1e-9 * m.trace() / static_cast<double>(m.rows());
}

Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& m) {
  return 0.5 * (m + m.transpose());
}

// Stacked observation matrix: one d-row block per via-point, block-diagonal
// in the dimension-major weight layout.
Eigen::MatrixXd stack_observation_matrix(const BasisConfig& config,
                                         const ViaPointSet& via_points) {
  const int k = config.num_basis;
  const int d = config.num_dims;
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(
      static_cast<int>(via_points.size()) * d, k * d);
  for (std::size_t j = 0; j < via_points.size(); ++j) {
    const Eigen::VectorXd phi = basis_vector(config, via_points[j].phase);
    for (int dim = 0; dim < d; ++dim)
      h.block(static_cast<int>(j) * d + dim, dim * k, 1, k) = phi.transpose();
  }
  return h;
}

}  // namespace

BasisConfig BasisConfig::uniform(int num_basis, int num_dims, double width_scale,
                                 bool normalize) {
  BasisConfig cfg;
  cfg.num_basis = num_basis;
  cfg.num_dims = num_dims;
  cfg.normalize = normalize;
  cfg.centers = Eigen::VectorXd::LinSpaced(num_basis, 0.0, 1.0);
  const double spacing = num_basis > 1 ? 1.0 / (num_basis - 1) : 1.0;
  cfg.widths = Eigen::VectorXd::Constant(num_basis, width_scale * spacing);
  cfg.validate();
  return cfg;
}

void BasisConfig::validate() const {
  if (num_basis < 2) throw InvalidInput("basis: need at least 2 basis functions");
  if (num_dims < 1) throw InvalidInput("basis: need at least 1 dimension");
  if (centers.size() != num_basis || widths.size() != num_basis)
    throw InvalidInput("basis: centers/widths size mismatch");
  for (int i = 0; i < num_basis; ++i) {
    if (centers[i] < 0.0 || centers[i] > 1.0)
      throw InvalidInput("basis: centers must lie in [0,1]");
    if (i > 0 && centers[i] <= centers[i - 1])
      throw InvalidInput("basis: centers must be strictly increasing");
    if (!(widths[i] > 0.0)) throw InvalidInput("basis: widths must be positive");
  }
}

void WeightDistribution::validate(double symmetry_tol, double psd_tol) const {
  if (covariance.rows() != covariance.cols() || covariance.rows() != mean.size())
    throw InvalidInput("weight distribution: mean/covariance size mismatch");
  if (!mean.allFinite() || !covariance.allFinite())
    throw InvalidInput("weight distribution: non-finite entries");
  if ((covariance - covariance.transpose()).cwiseAbs().maxCoeff() > symmetry_tol)
    throw InvalidInput("weight distribution: covariance not symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrize(covariance));
  if (es.info() != Eigen::Success)
    throw NumericalError("weight distribution: eigendecomposition failed");
  if (es.eigenvalues().minCoeff() < -psd_tol)
    throw InvalidInput("weight distribution: covariance not positive semi-definite");
}

void Trajectory::validate() const {
  const auto n = phases.size();
  if (n < 1) throw InvalidInput("trajectory: empty");
  if (static_cast<Eigen::Index>(points.size()) != n)
    throw InvalidInput("trajectory: phases/points length mismatch");
  if (std::abs(phases[0]) > 1e-12 || std::abs(phases[n - 1] - 1.0) > 1e-12)
    throw InvalidInput("trajectory: phases must start at 0 and end at 1");
  for (Eigen::Index i = 1; i < n; ++i)
    if (phases[i] <= phases[i - 1])
      throw InvalidInput("trajectory: phases must be strictly increasing");
  if (!point_covariance.empty() && point_covariance.size() != points.size())
    throw InvalidInput("trajectory: covariance length mismatch");
}

Eigen::VectorXd basis_vector(const BasisConfig& config, double phase) {
  config.validate();
  if (!std::isfinite(phase)) throw InvalidInput("basis_vector: non-finite phase");
  Eigen::VectorXd phi(config.num_basis);
  for (int i = 0; i < config.num_basis; ++i) {
    const double z = (phase - config.centers[i]) / config.widths[i];
    phi[i] = std::exp(-0.5 * z * z);
  }
  if (config.normalize) phi /= phi.sum();
  return phi;
}

Eigen::VectorXd decode(const BasisConfig& config, const Eigen::VectorXd& weights,
                       double phase) {
  if (weights.size() != config.weight_dim())
    throw InvalidInput("decode: weight length must equal K*d");
  const Eigen::VectorXd phi = basis_vector(config, phase);
  Eigen::VectorXd y(config.num_dims);
  for (int dim = 0; dim < config.num_dims; ++dim)
    y[dim] = phi.dot(weights.segment(dim * config.num_basis, config.num_basis));
  return y;
}

std::pair<Eigen::VectorXd, Eigen::MatrixXd> decode_distribution(
    const BasisConfig& config, const WeightDistribution& dist, double phase) {
  dist.validate();
  if (dist.mean.size() != config.weight_dim())
    throw InvalidInput("decode_distribution: weight length must equal K*d");
  const Eigen::VectorXd phi = basis_vector(config, phase);
  const int k = config.num_basis;
  const int d = config.num_dims;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(d, k * d);
  for (int dim = 0; dim < d; ++dim) a.block(dim, dim * k, 1, k) = phi.transpose();
  Eigen::VectorXd mean = a * dist.mean;
  Eigen::MatrixXd cov = symmetrize(a * dist.covariance * a.transpose());
  return {std::move(mean), std::move(cov)};
}

WeightDistribution fit_prior(const BasisConfig& config,
                             const std::vector<Trajectory>& demos, double ridge) {
  config.validate();
  if (demos.empty()) throw InvalidInput("fit_prior: need at least one demonstration");
  if (ridge < 0.0) throw InvalidInput("fit_prior: ridge must be >= 0");

  const int k = config.num_basis;
  const int d = config.num_dims;
  const int n_w = k * d;

  std::vector<Eigen::VectorXd> per_demo;
  per_demo.reserve(demos.size());
  for (const auto& demo : demos) {
    demo.validate();
    const auto n_samples = demo.phases.size();
    if (n_samples < k)
      throw IllPosedFit("fit_prior: demonstration has fewer samples than basis functions");
    Eigen::MatrixXd design(n_samples, k);
    for (Eigen::Index i = 0; i < n_samples; ++i)
      design.row(i) = basis_vector(config, demo.phases[i]).transpose();
    const Eigen::MatrixXd gram =
        design.transpose() * design + ridge * Eigen::MatrixXd::Identity(k, k);
    Eigen::LDLT<Eigen::MatrixXd> solver(gram);
    if (solver.info() != Eigen::Success)
      throw NumericalError("fit_prior: normal-equation factorization failed");

    Eigen::VectorXd w(n_w);
    Eigen::VectorXd target(n_samples);
    for (int dim = 0; dim < d; ++dim) {
      for (Eigen::Index i = 0; i < n_samples; ++i) {
        if (demo.points[i].size() != d)
          throw InvalidInput("fit_prior: demo point dimensionality mismatch");
        target[i] = demo.points[i][dim];
      }
      w.segment(dim * k, k) = solver.solve(design.transpose() * target);
    }
    per_demo.push_back(std::move(w));
  }

  WeightDistribution dist;
  dist.mean = Eigen::VectorXd::Zero(n_w);
  for (const auto& w : per_demo) dist.mean += w;
  dist.mean /= static_cast<double>(per_demo.size());

  dist.covariance = Eigen::MatrixXd::Zero(n_w, n_w);
  if (per_demo.size() >= 2) {
    for (const auto& w : per_demo) {
      const Eigen::VectorXd delta = w - dist.mean;
      dist.covariance += delta * delta.transpose();
    }
    dist.covariance /= static_cast<double>(per_demo.size() - 1);
    dist.covariance = symmetrize(dist.covariance);
  }

  // Regularize when the sample covariance cannot be full rank.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dist.covariance);
  const double max_eig = per_demo.size() >= 2 ? es.eigenvalues().maxCoeff() : 0.0;
  if (per_demo.size() < 2 ||
      es.eigenvalues().minCoeff() < 1e-12 * std::max(1.0, max_eig)) {
    dist.covariance += ridge * Eigen::MatrixXd::Identity(n_w, n_w);
  }
  return dist;
}

WeightDistribution condition(const WeightDistribution& dist, const BasisConfig& config,
                             const ViaPointSet& via_points) {
  dist.validate();
  if (via_points.empty()) return dist;
  const int d = config.num_dims;
  if (dist.mean.size() != config.weight_dim())
    throw InvalidInput("condition: weight length must equal K*d");

  const int m = static_cast<int>(via_points.size());
  Eigen::VectorXd stacked_targets(m * d);
  Eigen::MatrixXd obs_noise = Eigen::MatrixXd::Zero(m * d, m * d);
  for (int j = 0; j < m; ++j) {
    const auto& via = via_points[j];
    if (via.phase < 0.0 || via.phase > 1.0)
      throw InvalidInput("condition: via-point phase outside [0,1]");
    if (via.target.size() != d)
      throw InvalidInput("condition: via-point target dimensionality mismatch");
    stacked_targets.segment(j * d, d) = via.target;
    if (via.noise.size() == 0) {
      obs_noise.block(j * d, j * d, d, d) =
          kDefaultViaNoise * Eigen::MatrixXd::Identity(d, d);
    } else {
      if (via.noise.rows() != d || via.noise.cols() != d)
        throw InvalidInput("condition: via-point noise must be d x d");
      obs_noise.block(j * d, j * d, d, d) = via.noise;
    }
  }

  const Eigen::MatrixXd h = stack_observation_matrix(config, via_points);

  const Eigen::MatrixXd prior_cov = symmetrize(dist.covariance);
  const Eigen::MatrixXd cross = prior_cov * h.transpose();        // n x (m d)
  // jitter only what actually gets factorized
  Eigen::MatrixXd innovation_cov = symmetrize(h * cross) + obs_noise;
  innovation_cov += jitter_for(innovation_cov) *
                    Eigen::MatrixXd::Identity(m * d, m * d);

  Eigen::LDLT<Eigen::MatrixXd> solver(innovation_cov);
  if (solver.info() != Eigen::Success)
    throw NumericalError("condition: innovation covariance factorization failed");

  const Eigen::VectorXd residual = stacked_targets - h * dist.mean;
  WeightDistribution posterior;
  posterior.mean = dist.mean + cross * solver.solve(residual);
  posterior.covariance =
      symmetrize(prior_cov - cross * solver.solve(cross.transpose()));
  return posterior;
}

Eigen::VectorXd sample_weights(const WeightDistribution& dist, Rng& rng) {
  dist.validate();
  const Eigen::Index n = dist.mean.size();
  Eigen::MatrixXd cov = symmetrize(dist.covariance);
  const double jitter = jitter_for(cov);
  if (jitter > 0.0) cov += jitter * Eigen::MatrixXd::Identity(n, n);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  if (es.info() != Eigen::Success)
    throw NumericalError("sample_weights: eigendecomposition failed");
  Eigen::VectorXd scale = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  Eigen::VectorXd z(n);
  for (Eigen::Index i = 0; i < n; ++i) z[i] = rng.normal();
  return dist.mean + es.eigenvectors() * scale.asDiagonal() * z;
}

Trajectory decode_trajectory(const BasisConfig& config, const WeightDistribution& dist,
                             int num_points) {
  if (num_points < 2) throw InvalidInput("decode_trajectory: need at least 2 points");
  Trajectory traj;
  traj.phases = Eigen::VectorXd::LinSpaced(num_points, 0.0, 1.0);
  traj.points.reserve(num_points);
  traj.point_covariance.reserve(num_points);
  for (int i = 0; i < num_points; ++i) {
    auto [mean, cov] = decode_distribution(config, dist, traj.phases[i]);
    traj.points.push_back(std::move(mean));
    traj.point_covariance.push_back(std::move(cov));
  }
  return traj;
}

std::string promp_to_json(const BasisConfig& config, const WeightDistribution& dist) {
  json j;
  j["K"] = config.num_basis;
  j["d"] = config.num_dims;
  j["normalize"] = config.normalize;
  j["centers"] = std::vector<double>(config.centers.data(),
                                     config.centers.data() + config.centers.size());
  j["widths"] = std::vector<double>(config.widths.data(),
                                    config.widths.data() + config.widths.size());
  j["mean"] = std::vector<double>(dist.mean.data(), dist.mean.data() + dist.mean.size());
  std::vector<double> cov;
  cov.reserve(dist.covariance.size());
  for (Eigen::Index r = 0; r < dist.covariance.rows(); ++r)
    for (Eigen::Index c = 0; c < dist.covariance.cols(); ++c)
      cov.push_back(dist.covariance(r, c));
  j["cov_row_major"] = cov;
  return j.dump();
}

std::pair<BasisConfig, WeightDistribution> promp_from_json(const std::string& text) {
  const json j = json::parse(text);
  BasisConfig config;
  config.num_basis = j.at("K").get<int>();
  config.num_dims = j.at("d").get<int>();
  config.normalize = j.value("normalize", true);
  const auto centers = j.at("centers").get<std::vector<double>>();
  const auto widths = j.at("widths").get<std::vector<double>>();
  config.centers = Eigen::Map<const Eigen::VectorXd>(centers.data(), centers.size());
  config.widths = Eigen::Map<const Eigen::VectorXd>(widths.data(), widths.size());
  config.validate();

  WeightDistribution dist;
  const auto mean = j.at("mean").get<std::vector<double>>();
  const auto cov = j.at("cov_row_major").get<std::vector<double>>();
  const auto n = static_cast<Eigen::Index>(mean.size());
  if (static_cast<Eigen::Index>(cov.size()) != n * n)
    throw InvalidInput("promp_from_json: cov_row_major size must be mean^2");
  dist.mean = Eigen::Map<const Eigen::VectorXd>(mean.data(), n);
  dist.covariance.resize(n, n);
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index c = 0; c < n; ++c) dist.covariance(r, c) = cov[r * n + c];
  return {config, dist};
}

void write_trajectory_csv(const Trajectory& traj, std::ostream& out) {
  traj.validate();
  out.precision(17);
  const auto d = traj.points.empty() ? 0 : traj.points.front().size();
  out << "phase";
  for (Eigen::Index i = 0; i < d; ++i) out << ",dim" << i;
  out << '\n';
  for (Eigen::Index i = 0; i < traj.phases.size(); ++i) {
    out << traj.phases[i];
    for (Eigen::Index k = 0; k < d; ++k) out << ',' << traj.points[i][k];
    out << '\n';
  }
}

Trajectory read_trajectory_csv(std::istream& in) {
  Trajectory traj;
  std::string line;
  if (!std::getline(in, line)) throw InvalidInput("trajectory csv: empty stream");
  std::vector<double> phases;
  std::vector<Eigen::VectorXd> points;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    if (row.size() < 2) throw InvalidInput("trajectory csv: malformed row");
    phases.push_back(row[0]);
    points.emplace_back(
        Eigen::Map<const Eigen::VectorXd>(row.data() + 1, row.size() - 1));
  }
  traj.phases = Eigen::Map<const Eigen::VectorXd>(phases.data(), phases.size());
  traj.points = std::move(points);
  traj.validate();
  return traj;
}

}  // namespace ppt::promp
