#include "hanalab/qnet.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace hanalab {

ActionCatalog ActionCatalog::build(const GameConfig& cfg, int hash_dim) {
  ActionCatalog cat;
  cat.config = cfg;
  cat.hash_dim = hash_dim;
  const int total = cfg.total_action_ids();
  cat.features.reserve(size_t(total));
  for (int id = 0; id < total; ++id)
    cat.features.push_back(featurize(render_action(id_action(id, cfg)), hash_dim));
  return cat;
}

// -- DQN head -----------------------------------------------------------

QNetDqn::QNetDqn(int hash_dim, const std::vector<int>& hidden, int num_actions, uint64_t seed)
    : hash_dim_(hash_dim) {
  std::vector<int> sizes{hash_dim};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(num_actions);
  net_ = Mlp::init(sizes, seed);
}

Eigen::VectorXd QNetDqn::q_values(const FeatureVector& obs_feat,
                                  const std::vector<int>& candidate_ids,
                                  const ActionCatalog&) const {
  if (candidate_ids.empty()) throw ConfigError("q_values with empty candidate set");
  Eigen::VectorXd all = forward_one(net_, obs_feat);
  Eigen::VectorXd out(long(candidate_ids.size()));
  for (size_t i = 0; i < candidate_ids.size(); ++i) {
    if (candidate_ids[i] < 0 || candidate_ids[i] >= all.size())
      throw ConfigError("candidate id outside the fixed DQN head");
    out[long(i)] = all[candidate_ids[i]];
  }
  return out;
}

void QNetDqn::check_compatible(const GameConfig& cfg) const {
  if (net_.output_dim() != cfg.total_action_ids())
    throw CompatibilityError("fixed DQN head with " + std::to_string(net_.output_dim()) +
                             " outputs cannot play a game with " +
                             std::to_string(cfg.total_action_ids()) + " action ids");
}

// -- DRRN head ----------------------------------------------------------

QNetDrrn::QNetDrrn(int hash_dim, int embedding_dim, uint64_t seed)
    : hash_dim_(hash_dim), embedding_dim_(embedding_dim) {
  obs_encoder_ = Mlp::init({hash_dim, embedding_dim, embedding_dim}, derive_seed(seed, 1));
  action_encoder_ = Mlp::init({hash_dim, embedding_dim, embedding_dim}, derive_seed(seed, 2));
  combiner_ = Mlp::init({2 * embedding_dim, embedding_dim, 1}, derive_seed(seed, 3));
}

QNetDrrn::QNetDrrn(Mlp obs_encoder, Mlp action_encoder, Mlp combiner, int hash_dim)
    : obs_encoder_(std::move(obs_encoder)),
      action_encoder_(std::move(action_encoder)),
      combiner_(std::move(combiner)),
      hash_dim_(hash_dim),
      embedding_dim_(obs_encoder_.output_dim()) {}

Eigen::VectorXd QNetDrrn::q_values(const FeatureVector& obs_feat,
                                   const std::vector<int>& candidate_ids,
                                   const ActionCatalog& catalog) const {
  if (candidate_ids.empty()) throw ConfigError("q_values with empty candidate set");
  Eigen::VectorXd e_obs = forward_one(obs_encoder_, obs_feat);
  std::vector<const FeatureVector*> acts;
  acts.reserve(candidate_ids.size());
  for (int id : candidate_ids) acts.push_back(&catalog.features.at(size_t(id)));
  Eigen::MatrixXd e_act = forward(action_encoder_, acts);
  Eigen::MatrixXd x(2 * embedding_dim_, long(candidate_ids.size()));
  x.topRows(embedding_dim_) = e_obs.replicate(1, long(candidate_ids.size()));
  x.bottomRows(embedding_dim_) = e_act;
  return forward(combiner_, x).row(0).transpose();
}

// -- losses -------------------------------------------------------------

namespace {

int argmax_candidate(const Eigen::VectorXd& q) {
  int best = 0;
  for (long i = 1; i < q.size(); ++i)
    if (q[i] > q[best]) best = int(i);
  return best;
}

// Batched (observation, action) pair scores for a DRRN net with shared
// caches, so one backward pass covers every pair.
struct DrrnPairRun {
  ForwardCache obs_cache, act_cache, comb_cache;
  Eigen::MatrixXd scores;  // 1 x pairs
  std::vector<int> owner;  // pair -> batch sample index

  static DrrnPairRun forward_pairs(const QNetDrrn& net,
                                   const std::vector<const FeatureVector*>& obs_feats,
                                   const std::vector<const FeatureVector*>& act_feats,
                                   const std::vector<int>& owner) {
    DrrnPairRun run;
    run.owner = owner;
    Eigen::MatrixXd e_obs = forward(net.obs_encoder(), obs_feats, &run.obs_cache);
    Eigen::MatrixXd e_act = forward(net.action_encoder(), act_feats, &run.act_cache);
    Eigen::MatrixXd x(2 * net.embedding_dim(), e_obs.cols());
    x.topRows(net.embedding_dim()) = e_obs;
    x.bottomRows(net.embedding_dim()) = e_act;
    run.scores = forward(net.combiner(), x, &run.comb_cache);
    return run;
  }

  // dscores is 1 x pairs; accumulates into grads for the three nets.
  static void backward_pairs(QNetDrrn& net, const DrrnPairRun& run,
                             const Eigen::MatrixXd& dscores, MlpGrad& g_obs, MlpGrad& g_act,
                             MlpGrad& g_comb) {
    Eigen::MatrixXd dx =
        backward(net.combiner(), run.comb_cache, dscores, g_comb, /*want_dinput=*/true);
    backward(net.obs_encoder(), run.obs_cache, dx.topRows(net.embedding_dim()), g_obs);
    backward(net.action_encoder(), run.act_cache, dx.bottomRows(net.embedding_dim()), g_act);
  }
};

// Per-sample Q(o, a) for each candidate of each sample, with cached
// forward state so the caller can backpropagate per-candidate derivatives.
struct CandidateScores {
  // DQN path
  ForwardCache dqn_cache;
  Eigen::MatrixXd dqn_logits;  // actions x batch
  // DRRN path
  DrrnPairRun drrn_run;
  std::vector<std::vector<long>> pair_of;  // sample -> candidate -> pair column

  std::vector<Eigen::VectorXd> per_sample;  // candidate scores, input order
};

CandidateScores score_candidates(QNet& net, const std::vector<const FeatureVector*>& obs_feats,
                                 const std::vector<const std::vector<int>*>& candidates,
                                 const ActionCatalog& catalog) {
  CandidateScores out;
  if (auto* dqn = dynamic_cast<QNetDqn*>(&net)) {
    out.dqn_logits = forward(dqn->net(), obs_feats, &out.dqn_cache);
    for (size_t i = 0; i < candidates.size(); ++i) {
      Eigen::VectorXd q(long(candidates[i]->size()));
      for (size_t c = 0; c < candidates[i]->size(); ++c)
        q[long(c)] = out.dqn_logits((*candidates[i])[c], long(i));
      out.per_sample.push_back(std::move(q));
    }
    return out;
  }
  auto* drrn = dynamic_cast<QNetDrrn*>(&net);
  std::vector<const FeatureVector*> pair_obs, pair_act;
  std::vector<int> owner;
  out.pair_of.resize(candidates.size());
  for (size_t i = 0; i < candidates.size(); ++i)
    for (int id : *candidates[i]) {
      out.pair_of[i].push_back(long(pair_obs.size()));
      pair_obs.push_back(obs_feats[i]);
      pair_act.push_back(&catalog.features.at(size_t(id)));
      owner.push_back(int(i));
    }
  out.drrn_run = DrrnPairRun::forward_pairs(*drrn, pair_obs, pair_act, owner);
  for (size_t i = 0; i < candidates.size(); ++i) {
    Eigen::VectorXd q(long(candidates[i]->size()));
    for (size_t c = 0; c < candidates[i]->size(); ++c)
      q[long(c)] = out.drrn_run.scores(0, out.pair_of[i][c]);
    out.per_sample.push_back(std::move(q));
  }
  return out;
}

// Routes per-candidate loss derivatives back through the network.
Eigen::VectorXd backward_candidates(QNet& net, const CandidateScores& scores,
                                    const std::vector<const std::vector<int>*>& candidates,
                                    const std::vector<Eigen::VectorXd>& dq_per_sample) {
  if (auto* dqn = dynamic_cast<QNetDqn*>(&net)) {
    Eigen::MatrixXd dlogits =
        Eigen::MatrixXd::Zero(scores.dqn_logits.rows(), scores.dqn_logits.cols());
    for (size_t i = 0; i < candidates.size(); ++i)
      for (size_t c = 0; c < candidates[i]->size(); ++c)
        dlogits((*candidates[i])[c], long(i)) += dq_per_sample[i][long(c)];
    MlpGrad grad(dqn->net());
    backward(dqn->net(), scores.dqn_cache, dlogits, grad);
    return ParamPack::flatten_grads({&grad});
  }
  auto* drrn = dynamic_cast<QNetDrrn*>(&net);
  Eigen::MatrixXd dscores = Eigen::MatrixXd::Zero(1, scores.drrn_run.scores.cols());
  for (size_t i = 0; i < candidates.size(); ++i)
    for (size_t c = 0; c < candidates[i]->size(); ++c)
      dscores(0, scores.pair_of[i][c]) += dq_per_sample[i][long(c)];
  MlpGrad g_obs(drrn->obs_encoder()), g_act(drrn->action_encoder()), g_comb(drrn->combiner());
  DrrnPairRun::backward_pairs(*drrn, scores.drrn_run, dscores, g_obs, g_act, g_comb);
  return ParamPack::flatten_grads({&g_obs, &g_act, &g_comb});
}

}  // namespace

LossResult td_loss(const std::vector<BatchItem>& batch, QNet& net, const QNet& target_net,
                   double gamma, const ActionCatalog& catalog) {
  if (gamma < 0.0 || gamma > 1.0) throw ConfigError("gamma must be in [0,1]");
  const long b = long(batch.size());
  if (b == 0) throw ConfigError("empty batch");

  // Q(o, a) with gradients
  std::vector<const FeatureVector*> obs_feats;
  std::vector<std::vector<int>> taken(static_cast<size_t>(b));
  std::vector<const std::vector<int>*> taken_views;
  for (long i = 0; i < b; ++i) {
    obs_feats.push_back(&batch[size_t(i)].obs_feat);
    taken[size_t(i)] = {batch[size_t(i)].action};
    taken_views.push_back(&taken[size_t(i)]);
  }
  CandidateScores run = score_candidates(net, obs_feats, taken_views, catalog);

  // Bootstrap targets: online argmax, target value, no gradient path.
  Eigen::VectorXd targets(b);
  for (long i = 0; i < b; ++i) {
    const BatchItem& item = batch[size_t(i)];
    double bootstrap = 0.0;
    if (!item.done && gamma > 0.0) {
      Eigen::VectorXd q_online = net.q_values(item.next_feat, item.next_legal_ids, catalog);
      Eigen::VectorXd q_target =
          target_net.q_values(item.next_feat, item.next_legal_ids, catalog);
      bootstrap = q_target[argmax_candidate(q_online)];
    }
    targets[i] = item.reward + gamma * bootstrap;
  }

  LossResult out;
  std::vector<Eigen::VectorXd> dq(static_cast<size_t>(b));
  for (long i = 0; i < b; ++i) {
    const double diff = run.per_sample[size_t(i)][0] - targets[i];
    out.loss += diff * diff / double(b);
    dq[size_t(i)] = Eigen::VectorXd::Constant(1, 2.0 * diff / double(b));
  }
  out.grad = backward_candidates(net, run, taken_views, dq);
  return out;
}

LossResult distill_loss(const std::vector<BatchItem>& batch, const TeacherParams& teacher,
                        QNet& net, double tau, const ActionCatalog& catalog, bool teacher_mask) {
  if (tau <= 0.0) throw ConfigError("distillation temperature must be positive");
  const long b = long(batch.size());
  if (b == 0) throw ConfigError("empty batch");

  std::vector<const FeatureVector*> obs_feats;
  std::vector<const std::vector<int>*> legal_views;
  for (const BatchItem& item : batch) {
    obs_feats.push_back(&item.obs_feat);
    legal_views.push_back(&item.legal_ids);
  }
  CandidateScores run = score_candidates(net, obs_feats, legal_views, catalog);

  LossResult out;
  std::vector<Eigen::VectorXd> dq(static_cast<size_t>(b));
  for (long i = 0; i < b; ++i) {
    const BatchItem& item = batch[size_t(i)];
    Eigen::VectorXd full =
        teacher_dist(teacher, item.obs_text, item.legal_ids, teacher_mask);
    Eigen::VectorXd p(long(item.legal_ids.size()));
    for (size_t c = 0; c < item.legal_ids.size(); ++c) p[long(c)] = full[item.legal_ids[c]];
    Eigen::VectorXd log_pi = log_softmax(run.per_sample[size_t(i)] / tau);
    out.loss += -p.dot(log_pi) / double(b);
    // d/dq of -sum_a p_a log softmax(q/tau)_a
    Eigen::VectorXd pi = log_pi.array().exp();
    dq[size_t(i)] = (pi * p.sum() - p) / (tau * double(b));
  }
  out.grad = backward_candidates(net, run, legal_views, dq);
  return out;
}

double advantage(const QNet& net, const FeatureVector& obs_feat,
                 const std::vector<int>& legal_ids, int action, const ActionCatalog& catalog) {
  Eigen::VectorXd q = net.q_values(obs_feat, legal_ids, catalog);
  auto it = std::find(legal_ids.begin(), legal_ids.end(), action);
  if (it == legal_ids.end()) throw ConfigError("advantage of an action outside the legal set");
  return q[it - legal_ids.begin()] - q.mean();
}

BatchItem make_batch_item(const Transition& t, const TextTemplate& tmpl, int hash_dim) {
  BatchItem item;
  item.obs_text = render_observation(t.obs, tmpl);
  item.obs_feat = featurize(item.obs_text, hash_dim);
  item.action = action_id(t.action, tmpl.config);
  item.legal_ids = t.obs.legal_action_ids;
  item.reward = t.reward;
  item.done = t.done;
  item.next_feat = featurize(render_observation(t.next_obs, tmpl), hash_dim);
  item.next_legal_ids = t.next_obs.legal_action_ids;
  return item;
}

}  // namespace hanalab
