#pragma once

#include <Eigen/Dense>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "hanalab/errors.hpp"
#include "hanalab/feature.hpp"
#include "hanalab/rng.hpp"

namespace hanalab {

// Multilayer perceptron with rectifier hidden units and a linear output
// layer. Weights are (fan_out x fan_in) matrices so a column holds the fan-in
// weights of one input feature, which keeps the sparse first-layer paths on
// contiguous memory.
struct Mlp {
  std::vector<int> sizes;  // [input, hidden..., output]
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;

  static Mlp init(std::vector<int> sizes, uint64_t seed);
  static Mlp zeros(std::vector<int> sizes);

  int num_layers() const { return int(weights.size()); }
  int input_dim() const { return sizes.front(); }
  int output_dim() const { return sizes.back(); }
  long param_count() const;
  bool finite() const;
};

// Gradient accumulator shaped like an Mlp.
struct MlpGrad {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;

  explicit MlpGrad(const Mlp& net);
  void zero();
  void add_scaled(const MlpGrad& other, double scale);
};

struct ForwardCache {
  std::vector<Eigen::MatrixXd> pre;  // pre-activation per layer, (fan_out x batch)
  std::vector<Eigen::MatrixXd> act;  // rectified activations per hidden layer
  Eigen::MatrixXd dense_input;       // only kept on the dense path
  std::vector<const FeatureVector*> sparse_input;
};

// Batched forward pass over hashed-count inputs; returns logits
// (output_dim x batch). Pass a cache to enable backward().
Eigen::MatrixXd forward(const Mlp& net, std::span<const FeatureVector* const> batch,
                        ForwardCache* cache = nullptr);
Eigen::MatrixXd forward(const Mlp& net, const Eigen::MatrixXd& input,
                        ForwardCache* cache = nullptr);
Eigen::VectorXd forward_one(const Mlp& net, const FeatureVector& x);

// Backpropagates dLoss/dLogits, accumulating into grad. Returns
// dLoss/dInput when requested (dense-input caches only).
Eigen::MatrixXd backward(const Mlp& net, const ForwardCache& cache,
                         const Eigen::MatrixXd& dlogits, MlpGrad& grad,
                         bool want_dinput = false);

// -- losses -------------------------------------------------------------

Eigen::VectorXd softmax(const Eigen::VectorXd& logits);
Eigen::VectorXd log_softmax(const Eigen::VectorXd& logits);

struct CeResult {
  double loss = 0.0;
  Eigen::VectorXd dlogits;
};

// Weighted softmax cross-entropy: loss = -w * sum_j t_j log softmax(z)_j,
// gradient w * (softmax(z) - t). Negative weights are permitted.
CeResult softmax_ce(const Eigen::VectorXd& logits, const Eigen::VectorXd& target, double weight);

// -- optimization ---------------------------------------------------------

struct TrainConfig {
  double learning_rate = 1e-3;
  int batch_size = 64;
  double clip_norm = 5.0;  // <= 0 disables clipping
  int epochs = 10;
  long steps = 0;
  uint64_t seed = 0;
  std::string optimizer = "adam";  // or "sgd"

  void validate() const {
    if (learning_rate <= 0) throw ConfigError("learning rate must be positive");
    if (batch_size < 1) throw ConfigError("batch size must be >= 1");
    if (optimizer != "adam" && optimizer != "sgd")
      throw ConfigError("optimizer must be 'adam' or 'sgd'");
  }
};

// Flat view over the parameters of one or more networks; order is the
// networks in sequence, each layer's weight matrix in storage order followed
// by its bias.
class ParamPack {
 public:
  ParamPack() = default;
  explicit ParamPack(std::vector<Mlp*> nets) : nets_(std::move(nets)) {}
  long size() const;
  Eigen::VectorXd flatten() const;
  void unflatten(const Eigen::VectorXd& flat);
  static Eigen::VectorXd flatten_grads(const std::vector<const MlpGrad*>& grads);
  const std::vector<Mlp*>& nets() const { return nets_; }

 private:
  std::vector<Mlp*> nets_;
};

class Optimizer {
 public:
  Optimizer() = default;
  Optimizer(const TrainConfig& cfg, long param_count);

  // Clips the gradient to cfg.clip_norm, then applies one update.
  void step(ParamPack& params, Eigen::VectorXd grad);
  long step_count() const { return step_count_; }
  const std::string& type() const { return type_; }
  const Eigen::VectorXd& first_moment() const { return m_; }
  const Eigen::VectorXd& second_moment() const { return v_; }
  void restore_state(long step_count, Eigen::VectorXd m, Eigen::VectorXd v);

 private:
  std::string type_ = "adam";
  double lr_ = 1e-3;
  double clip_norm_ = 5.0;
  double beta1_ = 0.9;
  double beta2_ = 0.999;
  double eps_ = 1e-8;
  long step_count_ = 0;
  Eigen::VectorXd m_, v_;
};

// -- verification -----------------------------------------------------------

// Central-difference check of an analytic gradient over a seeded random
// subsample of parameters (at least min_probes, at most the full set).
// Returns the maximum relative error.
double finite_diff_check(ParamPack params, const std::function<double()>& loss_fn,
                         const Eigen::VectorXd& analytic_grad, double eps,
                         double sample_fraction = 0.01, uint64_t seed = 0,
                         int min_probes = 100);

}  // namespace hanalab
