#include "hanalab/nn.hpp"

#include <algorithm>
#include <cmath>

namespace hanalab {

Mlp Mlp::init(std::vector<int> sizes, uint64_t seed) {
  if (sizes.size() < 2) throw ConfigError("mlp needs at least input and output sizes");
  for (int s : sizes)
    if (s < 1) throw ConfigError("mlp layer sizes must be positive");
  Mlp net;
  net.sizes = std::move(sizes);
  SplitMix64 rng(seed);
  for (size_t l = 0; l + 1 < net.sizes.size(); ++l) {
    const int fan_in = net.sizes[l];
    const int fan_out = net.sizes[l + 1];
    const double bound = std::sqrt(6.0 / double(fan_in + fan_out));
    Eigen::MatrixXd w(fan_out, fan_in);
    for (int c = 0; c < fan_in; ++c)
      for (int r = 0; r < fan_out; ++r) w(r, c) = (2.0 * rng.next_double() - 1.0) * bound;
    net.weights.push_back(std::move(w));
    net.biases.push_back(Eigen::VectorXd::Zero(fan_out));
  }
  return net;
}

Mlp Mlp::zeros(std::vector<int> sizes) {
  Mlp net = init(sizes, 0);
  for (auto& w : net.weights) w.setZero();
  return net;
}

long Mlp::param_count() const {
  long n = 0;
  for (size_t l = 0; l < weights.size(); ++l) n += weights[l].size() + biases[l].size();
  return n;
}

bool Mlp::finite() const {
  for (size_t l = 0; l < weights.size(); ++l)
    if (!weights[l].allFinite() || !biases[l].allFinite()) return false;
  return true;
}

MlpGrad::MlpGrad(const Mlp& net) {
  for (size_t l = 0; l < net.weights.size(); ++l) {
    weights.push_back(Eigen::MatrixXd::Zero(net.weights[l].rows(), net.weights[l].cols()));
    biases.push_back(Eigen::VectorXd::Zero(net.biases[l].size()));
  }
}

void MlpGrad::zero() {
  for (auto& w : weights) w.setZero();
  for (auto& b : biases) b.setZero();
}

void MlpGrad::add_scaled(const MlpGrad& other, double scale) {
  for (size_t l = 0; l < weights.size(); ++l) {
    weights[l] += scale * other.weights[l];
    biases[l] += scale * other.biases[l];
  }
}

namespace {

Eigen::MatrixXd run_dense_tail(const Mlp& net, Eigen::MatrixXd z, ForwardCache* cache) {
  // z is the first layer's pre-activation; applies the remaining layers.
  if (cache) cache->pre.push_back(z);
  for (int l = 1; l < net.num_layers(); ++l) {
    Eigen::MatrixXd a = z.cwiseMax(0.0);
    if (cache) cache->act.push_back(a);
    z = (net.weights[size_t(l)] * a).colwise() + net.biases[size_t(l)];
    if (cache) cache->pre.push_back(z);
  }
  return z;
}

}  // namespace

Eigen::MatrixXd forward(const Mlp& net, std::span<const FeatureVector* const> batch,
                        ForwardCache* cache) {
  const int b = int(batch.size());
  Eigen::MatrixXd z = net.biases[0].replicate(1, b);
  for (int j = 0; j < b; ++j) {
    if (batch[size_t(j)]->dim != net.input_dim())
      throw ConfigError("feature dimension does not match network input");
    for (const auto& [idx, count] : batch[size_t(j)]->entries)
      z.col(j) += count * net.weights[0].col(idx);
  }
  if (cache) {
    cache->sparse_input.assign(batch.begin(), batch.end());
    cache->dense_input.resize(0, 0);
  }
  return run_dense_tail(net, std::move(z), cache);
}

Eigen::MatrixXd forward(const Mlp& net, const Eigen::MatrixXd& input, ForwardCache* cache) {
  if (input.rows() != net.input_dim())
    throw ConfigError("input dimension does not match network input");
  Eigen::MatrixXd z = (net.weights[0] * input).colwise() + net.biases[0];
  if (cache) {
    cache->dense_input = input;
    cache->sparse_input.clear();
  }
  return run_dense_tail(net, std::move(z), cache);
}

Eigen::VectorXd forward_one(const Mlp& net, const FeatureVector& x) {
  const FeatureVector* ptr = &x;
  return forward(net, std::span<const FeatureVector* const>(&ptr, 1)).col(0);
}

Eigen::MatrixXd backward(const Mlp& net, const ForwardCache& cache,
                         const Eigen::MatrixXd& dlogits, MlpGrad& grad, bool want_dinput) {
  const int layers = net.num_layers();
  Eigen::MatrixXd dz = dlogits;
  for (int l = layers - 1; l >= 1; --l) {
    grad.weights[size_t(l)] += dz * cache.act[size_t(l - 1)].transpose();
    grad.biases[size_t(l)] += dz.rowwise().sum();
    Eigen::MatrixXd da = net.weights[size_t(l)].transpose() * dz;
    dz = da.cwiseProduct((cache.pre[size_t(l - 1)].array() > 0.0).cast<double>().matrix());
  }
  grad.biases[0] += dz.rowwise().sum();
  if (!cache.sparse_input.empty()) {
    for (int j = 0; j < int(cache.sparse_input.size()); ++j)
      for (const auto& [idx, count] : cache.sparse_input[size_t(j)]->entries)
        grad.weights[0].col(idx) += count * dz.col(j);
    return {};
  }
  grad.weights[0] += dz * cache.dense_input.transpose();
  if (want_dinput) return net.weights[0].transpose() * dz;
  return {};
}

Eigen::VectorXd softmax(const Eigen::VectorXd& logits) {
  Eigen::VectorXd e = (logits.array() - logits.maxCoeff()).exp();
  return e / e.sum();
}

Eigen::VectorXd log_softmax(const Eigen::VectorXd& logits) {
  const double m = logits.maxCoeff();
  const double lse = m + std::log((logits.array() - m).exp().sum());
  return logits.array() - lse;
}

CeResult softmax_ce(const Eigen::VectorXd& logits, const Eigen::VectorXd& target, double weight) {
  if (logits.size() != target.size()) throw ConfigError("logits/target size mismatch");
  if (std::abs(target.sum() - 1.0) > 1e-6)
    throw ConfigError("target distribution must sum to 1");
  CeResult out;
  Eigen::VectorXd lsm = log_softmax(logits);
  out.loss = -weight * target.dot(lsm);
  out.dlogits = weight * (lsm.array().exp().matrix() - target);
  return out;
}

long ParamPack::size() const {
  long n = 0;
  for (const Mlp* net : nets_) n += net->param_count();
  return n;
}

Eigen::VectorXd ParamPack::flatten() const {
  Eigen::VectorXd flat(size());
  long at = 0;
  for (const Mlp* net : nets_)
    for (size_t l = 0; l < net->weights.size(); ++l) {
      const auto& w = net->weights[l];
      flat.segment(at, w.size()) = Eigen::Map<const Eigen::VectorXd>(w.data(), w.size());
      at += w.size();
      flat.segment(at, net->biases[l].size()) = net->biases[l];
      at += net->biases[l].size();
    }
  return flat;
}

void ParamPack::unflatten(const Eigen::VectorXd& flat) {
  if (flat.size() != size()) throw ConfigError("flat parameter size mismatch");
  long at = 0;
  for (Mlp* net : nets_)
    for (size_t l = 0; l < net->weights.size(); ++l) {
      auto& w = net->weights[l];
      Eigen::Map<Eigen::VectorXd>(w.data(), w.size()) = flat.segment(at, w.size());
      at += w.size();
      net->biases[l] = flat.segment(at, net->biases[l].size());
      at += net->biases[l].size();
    }
}

Eigen::VectorXd ParamPack::flatten_grads(const std::vector<const MlpGrad*>& grads) {
  long n = 0;
  for (const MlpGrad* g : grads)
    for (size_t l = 0; l < g->weights.size(); ++l) n += g->weights[l].size() + g->biases[l].size();
  Eigen::VectorXd flat(n);
  long at = 0;
  for (const MlpGrad* g : grads)
    for (size_t l = 0; l < g->weights.size(); ++l) {
      const auto& w = g->weights[l];
      flat.segment(at, w.size()) = Eigen::Map<const Eigen::VectorXd>(w.data(), w.size());
      at += w.size();
      flat.segment(at, g->biases[l].size()) = g->biases[l];
      at += g->biases[l].size();
    }
  return flat;
}

Optimizer::Optimizer(const TrainConfig& cfg, long param_count) {
  cfg.validate();
  type_ = cfg.optimizer;
  lr_ = cfg.learning_rate;
  clip_norm_ = cfg.clip_norm;
  if (type_ == "adam") {
    m_ = Eigen::VectorXd::Zero(param_count);
    v_ = Eigen::VectorXd::Zero(param_count);
  }
}

void Optimizer::step(ParamPack& params, Eigen::VectorXd grad) {
  if (!grad.allFinite()) throw TrainingError("non-finite gradient");
  if (clip_norm_ > 0) {
    const double norm = grad.norm();
    if (norm > clip_norm_) grad *= clip_norm_ / norm;
  }
  ++step_count_;
  Eigen::VectorXd theta = params.flatten();
  if (type_ == "sgd") {
    theta -= lr_ * grad;
  } else {
    m_ = beta1_ * m_ + (1.0 - beta1_) * grad;
    v_ = beta2_ * v_ + (1.0 - beta2_) * grad.cwiseProduct(grad);
    const double bc1 = 1.0 - std::pow(beta1_, double(step_count_));
    const double bc2 = 1.0 - std::pow(beta2_, double(step_count_));
    theta -= (lr_ / bc1) *
             (m_.array() / ((v_.array() / bc2).sqrt() + eps_)).matrix();
  }
  params.unflatten(theta);
}

void Optimizer::restore_state(long step_count, Eigen::VectorXd m, Eigen::VectorXd v) {
  step_count_ = step_count;
  m_ = std::move(m);
  v_ = std::move(v);
}

double finite_diff_check(ParamPack params, const std::function<double()>& loss_fn,
                         const Eigen::VectorXd& analytic_grad, double eps,
                         double sample_fraction, uint64_t seed, int min_probes) {
  const long n = params.size();
  if (analytic_grad.size() != n) throw ConfigError("analytic gradient size mismatch");
  long probes = std::max<long>(min_probes, long(double(n) * sample_fraction));
  probes = std::min(probes, n);
  SplitMix64 rng(seed);
  Eigen::VectorXd theta = params.flatten();
  double max_rel = 0.0;
  for (long p = 0; p < probes; ++p) {
    const long i = long(rng.next_below(uint64_t(n)));
    const double orig = theta[i];
    theta[i] = orig + eps;
    params.unflatten(theta);
    const double up = loss_fn();
    theta[i] = orig - eps;
    params.unflatten(theta);
    const double down = loss_fn();
    theta[i] = orig;
    const double fd = (up - down) / (2.0 * eps);
    const double an = analytic_grad[i];
    // The floor keeps central-difference roundoff on near-zero partials from
    // registering as large relative errors.
    const double rel = std::abs(fd - an) / std::max({std::abs(fd), std::abs(an), 1e-4});
    max_rel = std::max(max_rel, rel);
  }
  params.unflatten(theta);
  return max_rel;
}

}  // namespace hanalab
