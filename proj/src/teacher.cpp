#include "hanalab/teacher.hpp"

#include <algorithm>
#include <cmath>

#include "hanalab/checkpoint.hpp"
#include "hanalab/evaluate.hpp"
#include "hanalab/json_io.hpp"

namespace hanalab {

void TeacherParams::check_compatible(const GameConfig& cfg) const {
  if (net.output_dim() != cfg.total_action_ids())
    throw CompatibilityError("teacher head with " + std::to_string(net.output_dim()) +
                             " outputs cannot play a game with " +
                             std::to_string(cfg.total_action_ids()) + " action ids");
}

Eigen::VectorXd TeacherParams::logits(const std::string& obs_text) const {
  return forward_one(net, featurize(obs_text, hash_dim));
}

namespace {

Eigen::VectorXd mask_distribution(const Eigen::VectorXd& logits,
                                  const std::vector<int>& legal_ids) {
  if (legal_ids.empty())
    throw std::logic_error("masking with an empty legal set");
  Eigen::VectorXd sub(long(legal_ids.size()));
  for (size_t i = 0; i < legal_ids.size(); ++i) sub[long(i)] = logits[legal_ids[i]];
  Eigen::VectorXd probs = softmax(sub);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(logits.size());
  for (size_t i = 0; i < legal_ids.size(); ++i) out[legal_ids[i]] = probs[long(i)];
  return out;
}

// Indices of the k largest logits, ties broken toward lower id.
std::vector<int> top_k_ids(const Eigen::VectorXd& logits, int k) {
  std::vector<int> ids(size_t(logits.size()));
  for (size_t i = 0; i < ids.size(); ++i) ids[i] = int(i);
  std::stable_sort(ids.begin(), ids.end(),
                   [&](int a, int b) { return logits[a] > logits[b]; });
  ids.resize(size_t(std::min<long>(k, logits.size())));
  return ids;
}

}  // namespace

Eigen::VectorXd teacher_dist(const TeacherParams& params, const std::string& obs_text,
                             const std::vector<int>& legal_ids, bool mask_illegal) {
  Eigen::VectorXd z = params.logits(obs_text);
  if (!mask_illegal) return softmax(z);
  return mask_distribution(z, legal_ids);
}

TeacherTrainResult train_teacher(const std::vector<DatasetRecord>& train,
                                 const std::vector<DatasetRecord>& val,
                                 const TeacherTrainOptions& options) {
  options.train.validate();
  options.game.validate();
  if (train.empty()) throw ConfigError("empty training set");
  const int num_actions = options.game.total_action_ids();
  for (const auto& r : train)
    if (r.action_id < 0 || r.action_id >= num_actions)
      throw ConfigError("training record action id outside the configured id space");

  std::vector<int> sizes{options.hash_dim};
  sizes.insert(sizes.end(), options.hidden.begin(), options.hidden.end());
  sizes.push_back(num_actions);

  TeacherTrainResult result;
  result.params.hash_dim = options.hash_dim;
  result.params.net = Mlp::init(sizes, derive_seed(options.train.seed, 0));

  std::vector<FeatureVector> train_feats(train.size());
  for (size_t i = 0; i < train.size(); ++i)
    train_feats[i] = featurize(train[i].obs_text, options.hash_dim);
  std::vector<FeatureVector> val_feats(val.size());
  for (size_t i = 0; i < val.size(); ++i)
    val_feats[i] = featurize(val[i].obs_text, options.hash_dim);

  Mlp& net = result.params.net;
  ParamPack pack({&net});
  Optimizer opt(options.train, pack.size());
  SplitMix64 shuffle_rng(derive_seed(options.train.seed, 1));

  auto val_top1 = [&]() {
    if (val.empty()) return 0.0;
    long hits = 0;
    for (size_t i = 0; i < val.size(); ++i) {
      Eigen::VectorXd z = forward_one(net, val_feats[i]);
      int best = 0;
      for (int a = 1; a < num_actions; ++a)
        if (z[a] > z[best]) best = a;
      if (best == val[i].action_id) ++hits;
    }
    return double(hits) / double(val.size());
  };

  double best_metric = -std::numeric_limits<double>::infinity();
  Mlp best_net = net;

  std::vector<size_t> order(train.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (int epoch = 0; epoch < options.train.epochs; ++epoch) {
    fisher_yates_shuffle(order, shuffle_rng);
    double loss_sum = 0.0;
    long loss_count = 0;
    const int batch = options.train.batch_size;
    for (size_t start = 0; start < order.size(); start += size_t(batch)) {
      const size_t stop = std::min(order.size(), start + size_t(batch));
      const int b = int(stop - start);
      std::vector<const FeatureVector*> feats;
      feats.reserve(size_t(b));
      for (size_t i = start; i < stop; ++i) feats.push_back(&train_feats[order[i]]);
      ForwardCache cache;
      Eigen::MatrixXd logits = forward(net, feats, &cache);
      Eigen::MatrixXd dlogits(num_actions, b);
      for (int j = 0; j < b; ++j) {
        Eigen::VectorXd target = Eigen::VectorXd::Zero(num_actions);
        target[train[order[start + size_t(j)]].action_id] = 1.0;
        CeResult ce = softmax_ce(logits.col(j), target, 1.0);
        loss_sum += ce.loss;
        ++loss_count;
        dlogits.col(j) = ce.dlogits / double(b);
      }
      MlpGrad grad(net);
      backward(net, cache, dlogits, grad);
      opt.step(pack, ParamPack::flatten_grads({&grad}));
    }
    const double train_loss = loss_sum / double(std::max<long>(loss_count, 1));
    if (!std::isfinite(train_loss))
      throw TrainingError("teacher training diverged at epoch " + std::to_string(epoch) +
                          " (loss is not finite)");

    TeacherCurvePoint point;
    point.epoch = epoch;
    point.train_loss = train_loss;
    point.val_top1 = val_top1();
    double metric = point.val_top1;
    if (options.select_by_gameplay) {
      TeacherAgent agent(result.params, options.game, /*mask_raw_choice=*/false);
      EvalReport rep = eval_gameplay(agent, options.game, options.gameplay_games,
                                     options.gameplay_seed, IllegalPolicy::MaskRenormalize,
                                     options.threads);
      point.gameplay_mean = rep.mean_score;
      point.has_gameplay = true;
      metric = rep.mean_score;
    }
    result.curve.push_back(point);
    if (metric > best_metric) {
      best_metric = metric;
      best_net = net;
      result.best_epoch = epoch;
    }
  }
  result.params.net = std::move(best_net);
  return result;
}

std::map<int, double> eval_topk(const TeacherParams& params,
                                const std::vector<DatasetRecord>& test, int k_max) {
  if (test.empty()) throw ConfigError("empty test set");
  std::map<int, long> hits;
  for (const auto& rec : test) {
    Eigen::VectorXd z = params.logits(rec.obs_text);
    std::vector<int> top = top_k_ids(z, k_max);
    for (int k = 1; k <= k_max; ++k)
      if (std::find(top.begin(), top.begin() + std::min<size_t>(size_t(k), top.size()),
                    rec.action_id) != top.begin() + std::min<size_t>(size_t(k), top.size()))
        ++hits[k];
  }
  std::map<int, double> out;
  for (int k = 1; k <= k_max; ++k) out[k] = double(hits[k]) / double(test.size());
  return out;
}

std::map<int, double> eval_legal_overlap(const TeacherParams& params,
                                         const std::vector<DatasetRecord>& test, int k_max) {
  if (test.empty()) throw ConfigError("empty test set");
  std::map<int, double> sums;
  for (const auto& rec : test) {
    Eigen::VectorXd z = params.logits(rec.obs_text);
    std::vector<int> top = top_k_ids(z, k_max);
    for (int k = 1; k <= k_max; ++k) {
      long legal = 0;
      const int kk = int(std::min<size_t>(size_t(k), top.size()));
      for (int i = 0; i < kk; ++i)
        if (std::find(rec.legal_action_ids.begin(), rec.legal_action_ids.end(), top[size_t(i)]) !=
            rec.legal_action_ids.end())
          ++legal;
      sums[k] += double(legal) / double(kk);
    }
  }
  std::map<int, double> out;
  for (int k = 1; k <= k_max; ++k) out[k] = sums[k] / double(test.size());
  return out;
}

void save_teacher_checkpoint(const std::filesystem::path& path, const TeacherParams& params,
                             uint64_t rng_seed) {
  Checkpoint ck;
  ck.template_version = params.template_version;
  ck.hash_dim = params.hash_dim;
  ck.rng_seed = rng_seed;
  ck.head = "teacher";
  ck.nets.emplace("net", params.net);
  ck.save(path);
}

TeacherParams load_teacher_checkpoint(const std::filesystem::path& path) {
  Checkpoint ck = Checkpoint::load(path, std::string(kTextTemplateVersion));
  if (ck.head != "teacher")
    throw VersionError("checkpoint head '" + ck.head + "' is not a teacher");
  TeacherParams params;
  params.net = ck.nets.at("net");
  params.hash_dim = ck.hash_dim;
  params.template_version = ck.template_version;
  return params;
}

std::string teacher_curve_csv(const std::vector<TeacherCurvePoint>& curve) {
  std::string out = "epoch,train_loss,val_top1,gameplay_mean\n";
  for (const auto& p : curve) {
    out += std::to_string(p.epoch) + "," + format_real(p.train_loss) + "," +
           format_real(p.val_top1) + ",";
    if (p.has_gameplay) out += format_real(p.gameplay_mean);
    out += "\n";
  }
  return out;
}

Action TeacherAgent::act(const Observation& obs, const PartnerKnowledge& pk,
                         SplitMix64& rng) const {
  if (mask_raw_) return act_legal(obs, pk, rng);
  Eigen::VectorXd z = params_.logits(render_observation(obs, tmpl_));
  int best = 0;
  for (int a = 1; a < z.size(); ++a)
    if (z[a] > z[best]) best = a;
  return id_action(best, config_);
}

Action TeacherAgent::act_legal(const Observation& obs, const PartnerKnowledge&,
                               SplitMix64&) const {
  Eigen::VectorXd z = params_.logits(render_observation(obs, tmpl_));
  const auto& ids = obs.legal_action_ids;
  int best = ids[0];
  for (int id : ids)
    if (z[id] > z[best]) best = id;
  return id_action(best, config_);
}

}  // namespace hanalab
