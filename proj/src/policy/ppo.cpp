#include <algorithm>
#include <cmath>
#include <numeric>

#include "ppt/errors.hpp"
#include "ppt/policy.hpp"

namespace ppt::policy {

namespace {
constexpr double kLogStdMin = -5.0;
constexpr double kLogStdMax = 2.0;
constexpr double kLog2Pi = 1.8378770664093453;
}  // namespace

void RolloutBuffer::push(Eigen::VectorXd obs, Eigen::VectorXd action, double log_prob,
                         double reward, double value, bool done) {
  observations.push_back(std::move(obs));
  actions.push_back(std::move(action));
  log_probs.push_back(log_prob);
  rewards.push_back(reward);
  values.push_back(value);
  dones.push_back(done ? 1 : 0);
}

void RolloutBuffer::clear() {
  observations.clear();
  actions.clear();
  log_probs.clear();
  rewards.clear();
  values.clear();
  dones.clear();
  advantages.clear();
  returns.clear();
}

void compute_gae(RolloutBuffer& buffer, double discount, double gae_lambda,
                 double bootstrap_value) {
  const auto n = buffer.size();
  if (n == 0) throw InvalidInput("compute_gae: empty buffer");
  buffer.advantages.assign(n, 0.0);
  buffer.returns.assign(n, 0.0);
  double carry = 0.0;
  for (std::size_t i = n; i-- > 0;) {
    const double nonterminal = buffer.dones[i] ? 0.0 : 1.0;
    const double next_value = (i + 1 < n) ? buffer.values[i + 1] : bootstrap_value;
    const double delta =
        buffer.rewards[i] + discount * next_value * nonterminal - buffer.values[i];
    carry = delta + discount * gae_lambda * nonterminal * carry;
    buffer.advantages[i] = carry;
    buffer.returns[i] = carry + buffer.values[i];
  }
}

void PPOConfig::validate() const {
  if (clip_ratio <= 0.0 || clip_ratio >= 1.0)
    throw InvalidInput("ppo: clip_ratio must lie in (0,1)");
  if (discount <= 0.0 || discount > 1.0)
    throw InvalidInput("ppo: discount must lie in (0,1]");
  if (gae_lambda <= 0.0 || gae_lambda > 1.0)
    throw InvalidInput("ppo: gae_lambda must lie in (0,1]");
  if (epochs < 1 || minibatch_size < 1)
    throw InvalidInput("ppo: epochs and minibatch_size must be >= 1");
}

LossParts ppo_loss(const NetworkParams& params, const Batch& batch, const PPOConfig& cfg,
                   NetworkParams* grads) {
  const auto n = batch.obs.rows();
  const auto act_dim = params.arch.output;
  if (batch.actions.rows() != n || batch.log_probs_old.size() != n ||
      batch.advantages.size() != n || batch.returns.size() != n)
    throw InvalidInput("ppo_loss: inconsistent batch sizes");
  if (batch.actions.cols() != act_dim)
    throw InvalidInput("ppo_loss: action width mismatch");

  const std::size_t n_trunk = params.arch.hidden.size();

  // forward with caches
  std::vector<Eigen::MatrixXd> activations;     // h_0 = obs ... h_L
  std::vector<Eigen::MatrixXd> preactivations;  // z_1 ... z_L
  activations.push_back(batch.obs);
  for (std::size_t i = 0; i < n_trunk; ++i) {
    Eigen::MatrixXd z = (activations.back() * params.weights[i].transpose()).rowwise() +
                        params.biases[i].transpose();
    preactivations.push_back(z);
    activations.push_back(z.cwiseMax(0.0));
  }
  const Eigen::MatrixXd& trunk_out = activations.back();
  const Eigen::MatrixXd mean = (trunk_out * params.weights[n_trunk].transpose()).rowwise() +
                               params.biases[n_trunk].transpose();
  const Eigen::VectorXd value =
      (trunk_out * params.weights[n_trunk + 1].transpose()).col(0).array() +
      params.biases[n_trunk + 1][0];

  const Eigen::ArrayXd inv_var = (-2.0 * params.log_std.array()).exp();  // 1/sigma^2

  // log-probs, ratios, clipped surrogate
  Eigen::MatrixXd residual = batch.actions - mean;  // a - mu
  Eigen::VectorXd log_probs(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::ArrayXd r = residual.row(i).transpose().array();
    log_probs[i] = (-0.5 * r.square() * inv_var - params.log_std.array()).sum() -
                   0.5 * kLog2Pi * act_dim;
  }

  double surrogate_sum = 0.0;
  Eigen::VectorXd dloss_dlogp = Eigen::VectorXd::Zero(n);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double ratio = std::exp(log_probs[i] - batch.log_probs_old[i]);
    const double adv = batch.advantages[i];
    const double clipped =
        std::clamp(ratio, 1.0 - cfg.clip_ratio, 1.0 + cfg.clip_ratio);
    const double unclipped_term = ratio * adv;
    const double clipped_term = clipped * adv;
    surrogate_sum += std::min(unclipped_term, clipped_term);
    // gradient flows through the raw ratio only when it attains the min
    if (unclipped_term <= clipped_term) dloss_dlogp[i] = -inv_n * adv * ratio;
  }
  const double policy_loss = -surrogate_sum * inv_n;

  const Eigen::VectorXd value_error = value - batch.returns;
  const double value_loss = value_error.squaredNorm() * inv_n;

  const double entropy =
      params.log_std.sum() + 0.5 * act_dim * (1.0 + kLog2Pi);

  LossParts parts;
  parts.policy = policy_loss;
  parts.value = value_loss;
  parts.entropy = entropy;
  parts.total = policy_loss + cfg.value_coef * value_loss - cfg.entropy_coef * entropy;

  if (grads == nullptr) return parts;

  // ---- backward ----
  grads->arch = params.arch;
  grads->weights.assign(params.weights.size(), Eigen::MatrixXd());
  grads->biases.assign(params.biases.size(), Eigen::VectorXd());

  // d total / d mean and d total / d log_std through the log-probs
  Eigen::MatrixXd dmean(n, act_dim);
  Eigen::VectorXd dlog_std = Eigen::VectorXd::Constant(act_dim, -cfg.entropy_coef);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::ArrayXd r = residual.row(i).transpose().array();
    // dlogp/dmean_j = (a_j - mu_j)/sigma_j^2 ; dlogp/ds_j = r_j^2/sigma_j^2 - 1
    dmean.row(i) = (dloss_dlogp[i] * (r * inv_var)).matrix().transpose();
    dlog_std += (dloss_dlogp[i] * (r.square() * inv_var - 1.0)).matrix();
  }
  grads->log_std = dlog_std;

  // d total / d value
  const Eigen::VectorXd dvalue = (2.0 * cfg.value_coef * inv_n) * value_error;

  // heads
  grads->weights[n_trunk] = dmean.transpose() * trunk_out;
  grads->biases[n_trunk] = dmean.colwise().sum().transpose();
  grads->weights[n_trunk + 1] = dvalue.transpose() * trunk_out;
  grads->biases[n_trunk + 1] = Eigen::VectorXd::Constant(1, dvalue.sum());

  // trunk
  Eigen::MatrixXd dhidden = dmean * params.weights[n_trunk] +
                            dvalue * params.weights[n_trunk + 1];
  for (std::size_t i = n_trunk; i-- > 0;) {
    const Eigen::MatrixXd dz =
        dhidden.cwiseProduct((preactivations[i].array() > 0.0).cast<double>().matrix());
    grads->weights[i] = dz.transpose() * activations[i];
    grads->biases[i] = dz.colwise().sum().transpose();
    if (i > 0) dhidden = dz * params.weights[i];
  }
  return parts;
}

Eigen::VectorXd AdamOptimizer::step(const Eigen::VectorXd& grad, double lr) {
  ++t_;
  first_ = beta1_ * first_ + (1.0 - beta1_) * grad;
  second_ = beta2_ * second_.array() + (1.0 - beta2_) * grad.array().square();
  const double bias1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bias2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  return (-lr * (first_.array() / bias1) /
          ((second_.array() / bias2).sqrt() + eps_))
      .matrix();
}

PpoLearner::PpoLearner(NetworkParams params, PPOConfig cfg, std::uint64_t seed)
    : params_(std::move(params)),
      cfg_(cfg),
      adam_(params_.param_count()),
      lr_(cfg.learning_rate),
      rng_(seed) {
  cfg_.validate();
}

UpdateStats PpoLearner::update(const RolloutBuffer& buffer) {
  const auto n = static_cast<Eigen::Index>(buffer.size());
  if (n == 0) throw InvalidInput("ppo update: empty buffer");
  if (buffer.advantages.size() != buffer.size())
    throw InvalidInput("ppo update: advantages not computed");

  // assemble the full batch; normalize advantages once per update
  Batch full;
  full.obs.resize(n, params_.arch.input);
  full.actions.resize(n, params_.arch.output);
  full.log_probs_old.resize(n);
  full.advantages.resize(n);
  full.returns.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    full.obs.row(i) = buffer.observations[i].transpose();
    full.actions.row(i) = buffer.actions[i].transpose();
    full.log_probs_old[i] = buffer.log_probs[i];
    full.advantages[i] = buffer.advantages[i];
    full.returns[i] = buffer.returns[i];
  }
  const double adv_mean = full.advantages.mean();
  const double adv_std = std::sqrt(
      (full.advantages.array() - adv_mean).square().sum() / std::max<double>(1, n - 1));
  full.advantages = (full.advantages.array() - adv_mean) / (adv_std + 1e-8);

  const Eigen::VectorXd params_before = params_.flatten();
  UpdateStats stats;
  stats.learning_rate = lr_;

  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), 0);
  const auto mb = std::min<Eigen::Index>(cfg_.minibatch_size, n);

  NetworkParams grads = params_;  // shape template
  for (int epoch = 0; epoch < cfg_.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng_.engine());
    for (Eigen::Index start = 0; start < n; start += mb) {
      const Eigen::Index count = std::min(mb, n - start);
      Batch batch;
      batch.obs.resize(count, full.obs.cols());
      batch.actions.resize(count, full.actions.cols());
      batch.log_probs_old.resize(count);
      batch.advantages.resize(count);
      batch.returns.resize(count);
      for (Eigen::Index k = 0; k < count; ++k) {
        const Eigen::Index idx = order[start + k];
        batch.obs.row(k) = full.obs.row(idx);
        batch.actions.row(k) = full.actions.row(idx);
        batch.log_probs_old[k] = full.log_probs_old[idx];
        batch.advantages[k] = full.advantages[idx];
        batch.returns[k] = full.returns[idx];
      }

      const LossParts parts = ppo_loss(params_, batch, cfg_, &grads);
      if (!std::isfinite(parts.total)) {
        params_.unflatten(params_before);
        lr_ = std::max(cfg_.lr_min, lr_ * 0.5);
        stats.aborted = true;
        stats.learning_rate = lr_;
        return stats;
      }
      stats.policy_loss = parts.policy;
      stats.value_loss = parts.value;
      stats.entropy = parts.entropy;

      Eigen::VectorXd g = grads.flatten();
      const double norm = g.norm();
      stats.grad_norm = norm;
      if (cfg_.grad_clip_norm > 0.0 && norm > cfg_.grad_clip_norm)
        g *= cfg_.grad_clip_norm / norm;
      Eigen::VectorXd theta = params_.flatten() + adam_.step(g, lr_);
      params_.unflatten(theta);
      params_.log_std = params_.log_std.cwiseMax(kLogStdMin).cwiseMin(kLogStdMax);
    }
  }

  // measured KL over the whole batch drives the adaptive learning rate
  const ForwardResult fwd = forward(params_, full.obs);
  double kl_sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double logp = gaussian_log_prob(fwd.mean.row(i).transpose(), params_.log_std,
                                          full.actions.row(i).transpose());
    const double log_ratio = logp - full.log_probs_old[i];
    kl_sum += (std::exp(log_ratio) - 1.0) - log_ratio;
  }
  stats.approx_kl = kl_sum / static_cast<double>(n);

  if (stats.approx_kl > 2.0 * cfg_.kl_target)
    lr_ = std::max(cfg_.lr_min, lr_ * 0.5);
  else if (stats.approx_kl < 0.5 * cfg_.kl_target)
    lr_ = std::min(cfg_.lr_max, lr_ * 2.0);
  stats.learning_rate = lr_;
  return stats;
}

}  // namespace ppt::policy
