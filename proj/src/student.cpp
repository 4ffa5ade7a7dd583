#include "hanalab/student.hpp"

#include <algorithm>
#include <cmath>

#include "hanalab/checkpoint.hpp"
#include "hanalab/json_io.hpp"

namespace hanalab {

double lambda_schedule(long t, const DistillConfig& cfg) {
  if (t < cfg.warmup_updates) return 1.0;
  if (cfg.decay_updates == 0) return 0.0;
  const long into = t - cfg.warmup_updates;
  if (into >= cfg.decay_updates) return 0.0;
  return 1.0 - double(into) / double(cfg.decay_updates);
}

void StudentConfig::validate() const {
  game.validate();
  train.validate();
  if (head != "dqn" && head != "drrn") throw ConfigError("head must be 'dqn' or 'drrn'");
  if (gamma < 0.0 || gamma > 1.0) throw ConfigError("gamma must be in [0,1]");
  if (env_steps < 0) throw ConfigError("env_steps must be >= 0");
  if (update_every < 1) throw ConfigError("update_every must be >= 1");
  if (min_replay < 1) throw ConfigError("min_replay must be >= 1");
  if (priority_fraction < 0.0 || priority_fraction > 1.0)
    throw ConfigError("priority_fraction must be in [0,1]");
  if (target_sync < 1) throw ConfigError("target_sync must be >= 1");
  if (eps_fraction <= 0.0 || eps_fraction > 1.0)
    throw ConfigError("eps_fraction must be in (0,1]");
}

std::unique_ptr<QNet> StudentConfig::make_net(uint64_t seed) const {
  if (head == "dqn")
    return std::make_unique<QNetDqn>(hash_dim, hidden, game.total_action_ids(), seed);
  return std::make_unique<QNetDrrn>(hash_dim, embedding_dim, seed);
}

std::string student_curve_csv(const std::vector<StudentCurvePoint>& curve) {
  std::string out = "env_steps,updates,lambda,eval_mean,eval_stderr\n";
  for (const auto& p : curve)
    out += std::to_string(p.env_steps) + "," + std::to_string(p.updates) + "," +
           format_real(p.lambda) + "," + format_real(p.eval_mean) + "," +
           format_real(p.eval_stderr) + "\n";
  return out;
}

StudentAgent::StudentAgent(const QNet& net, GameConfig config, std::string name)
    : net_(net.clone()),
      config_(std::move(config)),
      catalog_(ActionCatalog::build(config_, net.hash_dim())),
      name_(std::move(name)) {
  tmpl_.config = config_;
}

Action StudentAgent::act(const Observation& obs, const PartnerKnowledge&, SplitMix64&) const {
  FeatureVector feat = featurize(render_observation(obs, tmpl_), net_->hash_dim());
  Eigen::VectorXd q = net_->q_values(feat, obs.legal_action_ids, catalog_);
  int best = 0;
  for (long i = 1; i < q.size(); ++i)
    if (q[i] > q[best]) best = int(i);
  return id_action(obs.legal_action_ids[size_t(best)], config_);
}

StudentTrainResult train_student(const StudentConfig& cfg, TeacherParams* teacher,
                                 const DistillConfig* distill, SelectionLoop* selection,
                                 const QNet* init_from) {
  cfg.validate();
  if (distill) distill->validate();
  if (teacher) teacher->check_compatible(cfg.game);

  TextTemplate tmpl;
  tmpl.config = cfg.game;
  ActionCatalog catalog = ActionCatalog::build(cfg.game, cfg.hash_dim);

  StudentTrainResult result;
  if (init_from) {
    init_from->check_compatible(cfg.game);
    if (init_from->hash_dim() != cfg.hash_dim)
      throw ConfigError("init_from hash_dim does not match the student config");
    result.net = init_from->clone();
  } else {
    result.net = cfg.make_net(derive_seed(cfg.train.seed, 11));
  }
  QNet& net = *result.net;
  std::unique_ptr<QNet> target = net.clone();
  std::unique_ptr<QNet> last_good = net.clone();

  ParamPack pack = net.params();
  Optimizer opt(cfg.train, pack.size());
  ReplayBuffer replay(cfg.replay_capacity);

  SplitMix64 act_rng(derive_seed(cfg.train.seed, 21));
  SplitMix64 replay_rng(derive_seed(cfg.train.seed, 22));

  long updates = 0;
  long games = 0;
  std::optional<GameState> state;

  auto epsilon = [&](long step) {
    const double anneal = std::max<double>(1.0, cfg.eps_fraction * double(cfg.env_steps));
    const double frac = std::min(1.0, double(step) / anneal);
    return cfg.eps_start + (cfg.eps_end - cfg.eps_start) * frac;
  };

  auto evaluate = [&](long env_step) {
    StudentAgent agent(net, cfg.game);
    EvalReport rep = eval_gameplay(agent, cfg.game, cfg.eval_games, cfg.eval_seed,
                                   IllegalPolicy::MaskRenormalize, cfg.threads);
    const double lam = distill && teacher ? lambda_schedule(updates, *distill) : 0.0;
    result.curve.push_back({env_step, updates, lam, rep.mean_score, rep.stderr_score});
  };

  evaluate(0);
  for (long step = 1; step <= cfg.env_steps; ++step) {
    if (!state) {
      GameConfig game_cfg = cfg.game;
      game_cfg.seed = derive_seed(cfg.train.seed, uint64_t(1000 + games));
      state = new_game(game_cfg);
      ++games;
    }
    Observation obs = observe(*state, state->current_player);
    Action action;
    if (act_rng.next_double() < epsilon(step)) {
      action = id_action(
          obs.legal_action_ids[size_t(act_rng.next_below(obs.legal_action_ids.size()))],
          cfg.game);
    } else {
      FeatureVector feat = featurize(render_observation(obs, tmpl), cfg.hash_dim);
      Eigen::VectorXd q = net.q_values(feat, obs.legal_action_ids, catalog);
      int best = 0;
      for (long i = 1; i < q.size(); ++i)
        if (q[i] > q[best]) best = int(i);
      action = id_action(obs.legal_action_ids[size_t(best)], cfg.game);
    }
    StepResult sr = apply_action(*state, action);
    Observation next_obs = observe(sr.state, sr.state.current_player);
    Transition t;
    t.obs = std::move(obs);
    t.action = action;
    t.reward = sr.reward;
    t.done = sr.state.is_terminal();
    t.oracle_features = oracle_features_of(t.obs, action, sr.reward, next_obs);
    t.next_obs = std::move(next_obs);
    const bool episode_end = t.done;
    if (selection) selection->on_transition(t);
    replay.push(std::move(t));
    if (episode_end) {
      if (selection) selection->on_episode_end();
      state.reset();
      result.total_episodes = games;
    } else {
      state = std::move(sr.state);
    }

    if (replay.size() >= cfg.min_replay && step % cfg.update_every == 0) {
      auto sampled = cfg.priority_fraction > 0.0
                         ? replay.sample_prioritized(cfg.train.batch_size,
                                                     cfg.priority_fraction, replay_rng)
                         : replay.sample(cfg.train.batch_size, replay_rng);
      std::vector<BatchItem> batch;
      batch.reserve(sampled.size());
      for (const Transition* tr : sampled)
        batch.push_back(make_batch_item(*tr, tmpl, cfg.hash_dim));

      double loss = 0.0;
      Eigen::VectorXd grad;
      const double lam = distill && teacher ? lambda_schedule(updates, *distill) : 0.0;
      const bool distill_only =
          teacher && distill && distill->gate_warmup && updates < distill->warmup_updates;
      if (distill_only) {
        LossResult dl = distill_loss(batch, *teacher, net, distill->tau, catalog,
                                     distill->teacher_mask);
        loss = dl.loss;
        grad = std::move(dl.grad);
      } else {
        LossResult td = td_loss(batch, net, *target, cfg.gamma, catalog);
        loss = td.loss;
        grad = std::move(td.grad);
        if (teacher && distill && lam > 0.0) {
          LossResult dl = distill_loss(batch, *teacher, net, distill->tau, catalog,
                                       distill->teacher_mask);
          loss += lam * dl.loss;
          grad += lam * dl.grad;
        }
      }
      if (!std::isfinite(loss)) {
        result.diverged = true;
        result.net = std::move(last_good);
        result.total_updates = updates;
        return result;
      }
      opt.step(pack, std::move(grad));
      ++updates;
      if (updates % cfg.target_sync == 0) target = net.clone();
    }

    if (selection && teacher) selection->maybe_refine(step, *teacher, &net, &catalog);

    if (step % cfg.eval_every == 0 || step == cfg.env_steps) {
      evaluate(step);
      last_good = net.clone();
    }
  }
  result.total_updates = updates;
  return result;
}

void save_student_checkpoint(const std::filesystem::path& path, const QNet& net,
                             uint64_t rng_seed) {
  Checkpoint ck;
  ck.template_version = std::string(kTextTemplateVersion);
  ck.hash_dim = net.hash_dim();
  ck.rng_seed = rng_seed;
  ck.head = net.head();
  if (net.head() == "dqn") {
    const auto& dqn = dynamic_cast<const QNetDqn&>(net);
    ck.nets.emplace("net", dqn.net());
  } else {
    const auto& drrn = dynamic_cast<const QNetDrrn&>(net);
    ck.nets.emplace("obs_encoder", drrn.obs_encoder());
    ck.nets.emplace("action_encoder", drrn.action_encoder());
    ck.nets.emplace("combiner", drrn.combiner());
  }
  ck.save(path);
}

std::unique_ptr<QNet> load_student_checkpoint(const std::filesystem::path& path) {
  Checkpoint ck = Checkpoint::load(path, std::string(kTextTemplateVersion));
  if (ck.head == "dqn") return std::make_unique<QNetDqn>(ck.nets.at("net"), ck.hash_dim);
  if (ck.head == "drrn")
    return std::make_unique<QNetDrrn>(ck.nets.at("obs_encoder"), ck.nets.at("action_encoder"),
                                      ck.nets.at("combiner"), ck.hash_dim);
  throw VersionError("unknown student head '" + ck.head + "'");
}

}  // namespace hanalab
