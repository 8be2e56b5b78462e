#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "ppt/rng.hpp"

namespace ppt::policy {

// --- network ----------------------------------------------------------------

// Feed-forward actor-critic: shared ReLU trunk, linear mean and value heads,
// state-independent log-std vector for the diagonal Gaussian action head.
struct MlpConfig {
  int input = 0;
  std::vector<int> hidden = {256, 256, 128};
  int output = 0;
};

struct NetworkParams {
  MlpConfig arch;
  std::vector<Eigen::MatrixXd> weights;  // trunk layers, then mean head, then value head
  std::vector<Eigen::VectorXd> biases;
  Eigen::VectorXd log_std;               // clamped to [-5, 2]

  static NetworkParams init(const MlpConfig& arch, Rng& rng, double head_scale = 0.01,
                            double log_std_init = -0.5);

  int param_count() const;
  // Flat layout: trunk (W row-major, then b) per layer, mean head W+b,
  // value head W+b, log_std. This is also the checkpoint payload order.
  Eigen::VectorXd flatten() const;
  void unflatten(const Eigen::VectorXd& flat);
  void validate() const;
};

struct ForwardResult {
  Eigen::MatrixXd mean;    // n x output
  Eigen::VectorXd value;   // n
};

ForwardResult forward(const NetworkParams& params, const Eigen::MatrixXd& obs);

struct PolicyDecision {
  Eigen::VectorXd action;
  double log_prob = 0.0;
  double value = 0.0;
};

// Samples from the diagonal Gaussian head (action = mean when deterministic).
PolicyDecision act(const NetworkParams& params, const Eigen::VectorXd& obs,
                   bool deterministic, Rng& rng);

double gaussian_log_prob(const Eigen::VectorXd& mean, const Eigen::VectorXd& log_std,
                         const Eigen::VectorXd& action);

// --- rollout buffer and GAE ---------------------------------------------------

struct RolloutBuffer {
  std::vector<Eigen::VectorXd> observations;
  std::vector<Eigen::VectorXd> actions;
  std::vector<double> log_probs;
  std::vector<double> rewards;
  std::vector<double> values;
  std::vector<std::uint8_t> dones;  // 1 when the episode ended at this step

  std::vector<double> advantages;  // raw GAE values
  std::vector<double> returns;     // advantages + values

  void push(Eigen::VectorXd obs, Eigen::VectorXd action, double log_prob, double reward,
            double value, bool done);
  void clear();
  std::size_t size() const { return rewards.size(); }
};

// Fills buffer.advantages / buffer.returns. bootstrap_value is V(s_n) for a
// truncated final episode (0 when the buffer ends on a terminal step).
void compute_gae(RolloutBuffer& buffer, double discount, double gae_lambda,
                 double bootstrap_value = 0.0);

// --- PPO ---------------------------------------------------------------------

struct PPOConfig {
  double clip_ratio = 0.2;
  double discount = 0.99;
  double gae_lambda = 0.95;
  int epochs = 5;
  int minibatch_size = 64;
  double learning_rate = 3e-4;
  double kl_target = 0.01;
  double entropy_coef = 0.005;
  double value_coef = 0.5;
  double grad_clip_norm = 1.0;
  double lr_min = 1e-6;
  double lr_max = 1e-2;

  void validate() const;
};

struct Batch {
  Eigen::MatrixXd obs;        // n x input
  Eigen::MatrixXd actions;    // n x output
  Eigen::VectorXd log_probs_old;
  Eigen::VectorXd advantages;  // already normalized by the caller
  Eigen::VectorXd returns;
};

struct LossParts {
  double total = 0.0;
  double policy = 0.0;
  double value = 0.0;
  double entropy = 0.0;
};

// Total PPO loss  -L_clip + c_v * L_value - c_e * entropy  and, when grads is
// non-null, its exact gradient via manual backpropagation.
LossParts ppo_loss(const NetworkParams& params, const Batch& batch, const PPOConfig& cfg,
                   NetworkParams* grads);

struct UpdateStats {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double approx_kl = 0.0;
  double learning_rate = 0.0;
  double grad_norm = 0.0;
  bool aborted = false;
};

class AdamOptimizer {
 public:
  explicit AdamOptimizer(int dim)
      : first_(Eigen::VectorXd::Zero(dim)), second_(Eigen::VectorXd::Zero(dim)) {}

  Eigen::VectorXd step(const Eigen::VectorXd& grad, double lr);

 private:
  Eigen::VectorXd first_;
  Eigen::VectorXd second_;
  long t_ = 0;
  double beta1_ = 0.9, beta2_ = 0.999, eps_ = 1e-8;
};

// Runs epochs of minibatch updates on the buffer; adapts the learning rate
// from the measured KL (halved above 2x target, doubled below 0.5x target).
class PpoLearner {
 public:
  PpoLearner(NetworkParams params, PPOConfig cfg, std::uint64_t seed);

  UpdateStats update(const RolloutBuffer& buffer);

  const NetworkParams& params() const { return params_; }
  NetworkParams& mutable_params() { return params_; }
  double learning_rate() const { return lr_; }

 private:
  NetworkParams params_;
  PPOConfig cfg_;
  AdamOptimizer adam_;
  double lr_;
  Rng rng_;
};

// --- observation normalization -------------------------------------------------

struct ObsNormalizer {
  Eigen::VectorXd mean;
  Eigen::VectorXd var;
  long count = 0;
  bool frozen = false;

  static ObsNormalizer identity(int dim);
  void update(const Eigen::VectorXd& obs);
  Eigen::VectorXd apply(const Eigen::VectorXd& obs) const;
};

// --- checkpoints ----------------------------------------------------------------
// File layout: one JSON header line (layer sizes, normalizer, extra metadata,
// parameter count), a '\n', then param_count little-endian 64-bit floats in
// NetworkParams::flatten order.
void save_checkpoint(const std::string& path, const NetworkParams& params,
                     const ObsNormalizer& normalizer, const std::string& extra_json);

struct Checkpoint {
  NetworkParams params;
  ObsNormalizer normalizer;
  std::string extra_json;
};

Checkpoint load_checkpoint(const std::string& path);

}  // namespace ppt::policy
