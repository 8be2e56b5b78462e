#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "ppt/errors.hpp"
#include "ppt/policy.hpp"

namespace ppt::policy {

namespace {
constexpr double kLogStdMin = -5.0;
constexpr double kLogStdMax = 2.0;
constexpr double kLog2Pi = 1.8378770664093453;
}  // namespace

NetworkParams NetworkParams::init(const MlpConfig& arch, Rng& rng, double head_scale,
                                  double log_std_init) {
  if (arch.input < 1 || arch.output < 1)
    throw InvalidInput("network: input/output dims must be >= 1");
  NetworkParams p;
  p.arch = arch;
  int fan_in = arch.input;
  for (int width : arch.hidden) {
    const double scale = std::sqrt(2.0 / fan_in);
    Eigen::MatrixXd w(width, fan_in);
    for (Eigen::Index i = 0; i < w.size(); ++i) w(i) = scale * rng.normal();
    p.weights.push_back(std::move(w));
    p.biases.push_back(Eigen::VectorXd::Zero(width));
    fan_in = width;
  }
  // mean head
  Eigen::MatrixXd w_mean(arch.output, fan_in);
  for (Eigen::Index i = 0; i < w_mean.size(); ++i) w_mean(i) = head_scale * rng.normal();
  p.weights.push_back(std::move(w_mean));
  p.biases.push_back(Eigen::VectorXd::Zero(arch.output));
  // value head
  Eigen::MatrixXd w_value(1, fan_in);
  const double value_scale = 1.0 / std::sqrt(static_cast<double>(fan_in));
  for (Eigen::Index i = 0; i < w_value.size(); ++i) w_value(i) = value_scale * rng.normal();
  p.weights.push_back(std::move(w_value));
  p.biases.push_back(Eigen::VectorXd::Zero(1));

  p.log_std = Eigen::VectorXd::Constant(arch.output, log_std_init);
  return p;
}

int NetworkParams::param_count() const {
  int n = static_cast<int>(log_std.size());
  for (std::size_t i = 0; i < weights.size(); ++i)
    n += static_cast<int>(weights[i].size() + biases[i].size());
  return n;
}

Eigen::VectorXd NetworkParams::flatten() const {
  Eigen::VectorXd flat(param_count());
  Eigen::Index pos = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const auto& w = weights[i];
    for (Eigen::Index r = 0; r < w.rows(); ++r)
      for (Eigen::Index c = 0; c < w.cols(); ++c) flat[pos++] = w(r, c);
    flat.segment(pos, biases[i].size()) = biases[i];
    pos += biases[i].size();
  }
  flat.segment(pos, log_std.size()) = log_std;
  return flat;
}

void NetworkParams::unflatten(const Eigen::VectorXd& flat) {
  if (flat.size() != param_count())
    throw InvalidInput("network: flat parameter size mismatch");
  Eigen::Index pos = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    auto& w = weights[i];
    for (Eigen::Index r = 0; r < w.rows(); ++r)
      for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = flat[pos++];
    biases[i] = flat.segment(pos, biases[i].size());
    pos += biases[i].size();
  }
  log_std = flat.segment(pos, log_std.size());
}

void NetworkParams::validate() const {
  if (weights.size() != biases.size() || weights.size() != arch.hidden.size() + 2)
    throw InvalidInput("network: layer count mismatch");
  for (const auto& w : weights)
    if (!w.allFinite()) throw InvalidInput("network: non-finite weights");
  for (const auto& b : biases)
    if (!b.allFinite()) throw InvalidInput("network: non-finite biases");
  if (!log_std.allFinite()) throw InvalidInput("network: non-finite log_std");
  if (log_std.minCoeff() < kLogStdMin - 1e-12 || log_std.maxCoeff() > kLogStdMax + 1e-12)
    throw InvalidInput("network: log_std outside clamp range");
}

ForwardResult forward(const NetworkParams& params, const Eigen::MatrixXd& obs) {
  if (obs.cols() != params.arch.input)
    throw InvalidInput("forward: observation width mismatch");
  const std::size_t n_trunk = params.arch.hidden.size();
  Eigen::MatrixXd h = obs;
  for (std::size_t i = 0; i < n_trunk; ++i) {
    h = (h * params.weights[i].transpose()).rowwise() + params.biases[i].transpose();
    h = h.cwiseMax(0.0);
  }
  ForwardResult out;
  out.mean = (h * params.weights[n_trunk].transpose()).rowwise() +
             params.biases[n_trunk].transpose();
  out.value = (h * params.weights[n_trunk + 1].transpose()).col(0).array() +
              params.biases[n_trunk + 1][0];
  return out;
}

double gaussian_log_prob(const Eigen::VectorXd& mean, const Eigen::VectorXd& log_std,
                         const Eigen::VectorXd& action) {
  double lp = 0.0;
  for (Eigen::Index j = 0; j < mean.size(); ++j) {
    const double z = (action[j] - mean[j]) * std::exp(-log_std[j]);
    lp += -0.5 * z * z - log_std[j] - 0.5 * kLog2Pi;
  }
  return lp;
}

PolicyDecision act(const NetworkParams& params, const Eigen::VectorXd& obs,
                   bool deterministic, Rng& rng) {
  const ForwardResult fwd = forward(params, obs.transpose());
  PolicyDecision decision;
  const Eigen::VectorXd mean = fwd.mean.row(0).transpose();
  decision.value = fwd.value[0];
  if (deterministic) {
    decision.action = mean;
  } else {
    decision.action = mean;
    for (Eigen::Index j = 0; j < mean.size(); ++j)
      decision.action[j] += std::exp(params.log_std[j]) * rng.normal();
  }
  decision.log_prob = gaussian_log_prob(mean, params.log_std, decision.action);
  return decision;
}

ObsNormalizer ObsNormalizer::identity(int dim) {
  ObsNormalizer n;
  n.mean = Eigen::VectorXd::Zero(dim);
  n.var = Eigen::VectorXd::Ones(dim);
  n.count = 0;
  return n;
}

void ObsNormalizer::update(const Eigen::VectorXd& obs) {
  if (frozen) return;
  if (count == 0 && mean.size() == 0) {
    mean = Eigen::VectorXd::Zero(obs.size());
    var = Eigen::VectorXd::Ones(obs.size());
  }
  ++count;
  if (count == 1) {
    mean = obs;
    var = Eigen::VectorXd::Zero(obs.size());
    return;
  }
  const Eigen::VectorXd delta = obs - mean;
  mean += delta / static_cast<double>(count);
  var += (delta.cwiseProduct(obs - mean) - var) / static_cast<double>(count);
}

Eigen::VectorXd ObsNormalizer::apply(const Eigen::VectorXd& obs) const {
  if (count < 2) return obs;
  const Eigen::VectorXd scale = (var.array() + 1e-8).sqrt().inverse().matrix();
  Eigen::VectorXd out = (obs - mean).cwiseProduct(scale);
  return out.cwiseMax(-10.0).cwiseMin(10.0);
}

void save_checkpoint(const std::string& path, const NetworkParams& params,
                     const ObsNormalizer& normalizer, const std::string& extra_json) {
  nlohmann::json header;
  header["format"] = "ppt-checkpoint-v1";
  header["param_count"] = params.param_count();
  std::vector<int> layer_sizes;
  layer_sizes.push_back(params.arch.input);
  for (int h : params.arch.hidden) layer_sizes.push_back(h);
  layer_sizes.push_back(params.arch.output);
  header["layer_sizes"] = layer_sizes;
  header["obs_norm"] = {
      {"mean", std::vector<double>(normalizer.mean.data(),
                                   normalizer.mean.data() + normalizer.mean.size())},
      {"var", std::vector<double>(normalizer.var.data(),
                                  normalizer.var.data() + normalizer.var.size())},
      {"count", normalizer.count}};
  header["extra"] = extra_json.empty() ? nlohmann::json::object()
                                       : nlohmann::json::parse(extra_json);

  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("save_checkpoint: cannot open " + path);
  out << header.dump() << '\n';
  const Eigen::VectorXd flat = params.flatten();
  out.write(reinterpret_cast<const char*>(flat.data()),
            static_cast<std::streamsize>(flat.size() * sizeof(double)));
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("load_checkpoint: cannot open " + path);
  std::string header_line;
  std::getline(in, header_line);
  const nlohmann::json header = nlohmann::json::parse(header_line);
  if (header.value("format", "") != "ppt-checkpoint-v1")
    throw InvalidInput("load_checkpoint: unknown format");

  const auto layer_sizes = header.at("layer_sizes").get<std::vector<int>>();
  if (layer_sizes.size() < 2) throw InvalidInput("load_checkpoint: bad layer sizes");
  MlpConfig arch;
  arch.input = layer_sizes.front();
  arch.output = layer_sizes.back();
  arch.hidden.assign(layer_sizes.begin() + 1, layer_sizes.end() - 1);

  Checkpoint ckpt;
  Rng scratch(0);
  ckpt.params = NetworkParams::init(arch, scratch);
  const int n = ckpt.params.param_count();
  if (header.at("param_count").get<int>() != n)
    throw InvalidInput("load_checkpoint: parameter count mismatch");
  Eigen::VectorXd flat(n);
  in.read(reinterpret_cast<char*>(flat.data()),
          static_cast<std::streamsize>(n * sizeof(double)));
  if (in.gcount() != static_cast<std::streamsize>(n * sizeof(double)))
    throw InvalidInput("load_checkpoint: truncated payload");
  ckpt.params.unflatten(flat);

  const auto norm_mean = header.at("obs_norm").at("mean").get<std::vector<double>>();
  const auto norm_var = header.at("obs_norm").at("var").get<std::vector<double>>();
  ckpt.normalizer.mean =
      Eigen::Map<const Eigen::VectorXd>(norm_mean.data(), norm_mean.size());
  ckpt.normalizer.var =
      Eigen::Map<const Eigen::VectorXd>(norm_var.data(), norm_var.size());
  ckpt.normalizer.count = header.at("obs_norm").at("count").get<long>();
  ckpt.normalizer.frozen = true;
  ckpt.extra_json = header.at("extra").dump();
  return ckpt;
}

}  // namespace ppt::policy
