#pragma once

#include <memory>
#include <string>
#include <vector>

#include "hanalab/codec.hpp"
#include "hanalab/nn.hpp"
#include "hanalab/teacher.hpp"

namespace hanalab {

// Featurized canonical text of every action id under one game config;
// shared by DRRN scoring and kept immutable once built.
struct ActionCatalog {
  GameConfig config;
  int hash_dim = 0;
  std::vector<FeatureVector> features;  // indexed by action id

  static ActionCatalog build(const GameConfig& cfg, int hash_dim);
};

// Value head interface: one Q-value per candidate action, candidate order
// preserved. Implementations carry their own parameters.
class QNet {
 public:
  virtual ~QNet() = default;
  virtual std::string head() const = 0;
  virtual int hash_dim() const = 0;
  virtual Eigen::VectorXd q_values(const FeatureVector& obs_feat,
                                   const std::vector<int>& candidate_ids,
                                   const ActionCatalog& catalog) const = 0;
  virtual std::vector<Mlp*> nets() = 0;
  virtual std::vector<const Mlp*> nets() const = 0;
  virtual std::unique_ptr<QNet> clone() const = 0;
  virtual void check_compatible(const GameConfig& cfg) const = 0;

  ParamPack params() { return ParamPack(nets()); }
};

// Fixed-output head: featurize(obs_text) -> one Q-value per action id.
class QNetDqn : public QNet {
 public:
  QNetDqn(int hash_dim, const std::vector<int>& hidden, int num_actions, uint64_t seed);
  explicit QNetDqn(Mlp net, int hash_dim) : net_(std::move(net)), hash_dim_(hash_dim) {}

  std::string head() const override { return "dqn"; }
  int hash_dim() const override { return hash_dim_; }
  Eigen::VectorXd q_values(const FeatureVector& obs_feat, const std::vector<int>& candidate_ids,
                           const ActionCatalog& catalog) const override;
  std::vector<Mlp*> nets() override { return {&net_}; }
  std::vector<const Mlp*> nets() const override { return {&net_}; }
  std::unique_ptr<QNet> clone() const override { return std::make_unique<QNetDqn>(*this); }
  void check_compatible(const GameConfig& cfg) const override;

  Mlp& net() { return net_; }
  const Mlp& net() const { return net_; }

 private:
  Mlp net_;
  int hash_dim_;
};

// Text-action head: separate observation and action encoders combined by a
// scalar-output network, so the candidate set may be any size (player-count
// transfer without architecture change).
class QNetDrrn : public QNet {
 public:
  QNetDrrn(int hash_dim, int embedding_dim, uint64_t seed);
  QNetDrrn(Mlp obs_encoder, Mlp action_encoder, Mlp combiner, int hash_dim);

  std::string head() const override { return "drrn"; }
  int hash_dim() const override { return hash_dim_; }
  Eigen::VectorXd q_values(const FeatureVector& obs_feat, const std::vector<int>& candidate_ids,
                           const ActionCatalog& catalog) const override;
  std::vector<Mlp*> nets() override { return {&obs_encoder_, &action_encoder_, &combiner_}; }
  std::vector<const Mlp*> nets() const override {
    return {&obs_encoder_, &action_encoder_, &combiner_};
  }
  std::unique_ptr<QNet> clone() const override { return std::make_unique<QNetDrrn>(*this); }
  void check_compatible(const GameConfig&) const override {}  // any action-set size

  const Mlp& obs_encoder() const { return obs_encoder_; }
  const Mlp& action_encoder() const { return action_encoder_; }
  const Mlp& combiner() const { return combiner_; }
  int embedding_dim() const { return embedding_dim_; }

 private:
  Mlp obs_encoder_, action_encoder_, combiner_;
  int hash_dim_;
  int embedding_dim_;
};

// One replay sample prepared for loss computation.
struct BatchItem {
  std::string obs_text;
  FeatureVector obs_feat;
  int action = 0;  // action id
  std::vector<int> legal_ids;
  double reward = 0.0;
  bool done = false;
  FeatureVector next_feat;
  std::vector<int> next_legal_ids;
};

struct LossResult {
  double loss = 0.0;
  Eigen::VectorXd grad;  // flat, aligned with net.params()
};

// Squared TD error with double-DQN targets: the online net picks the next
// action, the target net values it; the bootstrap term is dropped on done.
LossResult td_loss(const std::vector<BatchItem>& batch, QNet& net, const QNet& target_net,
                   double gamma, const ActionCatalog& catalog);

// Cross-entropy of the student's legal-masked softmax(Q / tau) under the
// teacher's distribution, averaged over the batch.
LossResult distill_loss(const std::vector<BatchItem>& batch, const TeacherParams& teacher,
                        QNet& net, double tau, const ActionCatalog& catalog,
                        bool teacher_mask = true);

// Q(o,a) minus the mean Q over the legal set.
double advantage(const QNet& net, const FeatureVector& obs_feat,
                 const std::vector<int>& legal_ids, int action, const ActionCatalog& catalog);

BatchItem make_batch_item(const Transition& t, const TextTemplate& tmpl, int hash_dim);

}  // namespace hanalab
