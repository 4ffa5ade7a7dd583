#include "hanalab/selection.hpp"

#include <algorithm>
#include <cmath>

#include "hanalab/json_io.hpp"

namespace hanalab {

Heuristic heuristic_from_string(const std::string& s) {
  if (s == "UT" || s == "ut") return Heuristic::UT;
  if (s == "OC" || s == "oc") return Heuristic::OC;
  if (s == "RT" || s == "rt") return Heuristic::RT;
  throw ConfigError("unknown heuristic '" + s + "'");
}

std::string to_string(Heuristic h) {
  switch (h) {
    case Heuristic::UT: return "UT";
    case Heuristic::OC: return "OC";
    case Heuristic::RT: return "RT";
  }
  return "?";
}

WeightVariant weight_variant_from_string(const std::string& s) {
  if (s == "uniform") return WeightVariant::Uniform;
  if (s == "exp_adv") return WeightVariant::ExpAdv;
  if (s == "lin_adv") return WeightVariant::LinAdv;
  throw ConfigError("unknown weight variant '" + s + "'");
}

std::string to_string(WeightVariant v) {
  switch (v) {
    case WeightVariant::Uniform: return "uniform";
    case WeightVariant::ExpAdv: return "exp_adv";
    case WeightVariant::LinAdv: return "lin_adv";
  }
  return "?";
}

void SelectionConfig::validate() const {
  if (p_plus < 0.0 || p_plus > 1.0) throw ConfigError("p_plus must be in [0,1]");
  if (gradient_steps < 1) throw ConfigError("gradient_steps must be >= 1");
  if (d_lm < 1) throw ConfigError("d_lm must be >= 1");
  if (buffer_capacity < 1) throw ConfigError("buffer capacity must be >= 1");
  if (beta <= 0.0) throw ConfigError("beta must be positive");
  refine.validate();
}

std::vector<TransitionLabel> categorize(const std::vector<Transition>& episode, Heuristic h) {
  std::vector<TransitionLabel> labels(episode.size(), TransitionLabel::Minus);
  switch (h) {
    case Heuristic::UT:
      std::fill(labels.begin(), labels.end(), TransitionLabel::Plus);
      break;
    case Heuristic::OC:
      for (size_t i = 0; i < episode.size(); ++i) {
        const OracleFeatures& f = episode[i].oracle_features;
        if (f.reward_positive || f.fireworks_changed || f.knowledge_tightened)
          labels[i] = TransitionLabel::Plus;
      }
      break;
    case Heuristic::RT: {
      // plus on (prev_nonzero, t] for every positive-reward index t;
      // negative rewards only mark boundaries
      long prev_nonzero = -1;
      for (size_t i = 0; i < episode.size(); ++i) {
        const double r = episode[i].reward;
        if (r > 0.0)
          for (long j = prev_nonzero + 1; j <= long(i); ++j)
            labels[size_t(j)] = TransitionLabel::Plus;
        if (r != 0.0) prev_nonzero = long(i);
      }
      break;
    }
  }
  return labels;
}

void CategorizedBuffers::insert(Transition t, TransitionLabel label) {
  if (label == TransitionLabel::Plus)
    d_plus.push(std::move(t));
  else
    d_minus.push(std::move(t));
}

std::vector<const Transition*> sample_batch(const CategorizedBuffers& buffers, double p_plus,
                                            long n, SplitMix64& rng) {
  if (buffers.empty()) throw ConfigError("both selection buffers are empty");
  std::vector<const Transition*> out;
  out.reserve(size_t(n));
  for (long i = 0; i < n; ++i) {
    bool use_plus = rng.next_double() < p_plus;
    if (use_plus && buffers.d_plus.empty()) use_plus = false;
    if (!use_plus && buffers.d_minus.empty()) use_plus = true;
    const ReplayBuffer& buf = use_plus ? buffers.d_plus : buffers.d_minus;
    out.push_back(&buf.at(long(rng.next_below(uint64_t(buf.size())))));
  }
  return out;
}

double weight(const Transition& t, WeightVariant variant, double beta,
              const std::function<double(const Transition&)>& advantage_fn) {
  switch (variant) {
    case WeightVariant::Uniform:
      return 1.0;
    case WeightVariant::ExpAdv:
      return std::clamp(std::exp(beta * advantage_fn(t)), 0.0, 1e4);
    case WeightVariant::LinAdv:
      return 1.0 + beta * advantage_fn(t);
  }
  return 1.0;
}

std::string refine_report_jsonl(const std::vector<RefineReportRow>& rows) {
  std::string out;
  for (const auto& r : rows) {
    nlohmann::json j{{"step", r.env_step},         {"gradient_step", r.gradient_step},
                     {"heuristic", r.heuristic},   {"p_plus", r.p_plus},
                     {"mean_weight", r.mean_weight}, {"loss", r.loss}};
    out += j.dump();
    out += '\n';
  }
  return out;
}

RefineOutcome refine_teacher(TeacherParams& teacher, CategorizedBuffers& buffers,
                             const SelectionConfig& cfg, const QNet* q_net,
                             const ActionCatalog* catalog, const TextTemplate& tmpl,
                             long env_step, uint64_t round_index) {
  cfg.validate();
  RefineOutcome out;
  if (buffers.empty()) {
    out.skipped = true;
    return out;
  }
  if (cfg.weight_variant != WeightVariant::Uniform && (q_net == nullptr || catalog == nullptr))
    throw ConfigError("advantage-weighted refinement needs a student Q-net");

  auto advantage_fn = [&](const Transition& t) {
    return advantage(*q_net, featurize(render_observation(t.obs, tmpl), q_net->hash_dim()),
                     t.obs.legal_action_ids, action_id(t.action, tmpl.config), *catalog);
  };

  Mlp& net = teacher.net;
  const int num_actions = net.output_dim();
  ParamPack pack({&net});
  TrainConfig refine_cfg = cfg.refine;
  refine_cfg.batch_size = cfg.d_lm;
  Optimizer opt(refine_cfg, pack.size());
  SplitMix64 rng(derive_seed(cfg.seed, round_index));
  const int report_every = std::max(1, cfg.gradient_steps / 50);

  for (int step = 0; step < cfg.gradient_steps; ++step) {
    auto batch = sample_batch(buffers, cfg.p_plus, cfg.d_lm, rng);
    std::vector<FeatureVector> feats(batch.size());
    std::vector<const FeatureVector*> views(batch.size());
    std::vector<double> weights(batch.size());
    for (size_t i = 0; i < batch.size(); ++i) {
      feats[i] = featurize(render_observation(batch[i]->obs, tmpl), teacher.hash_dim);
      views[i] = &feats[i];
      weights[i] = weight(*batch[i], cfg.weight_variant, cfg.beta, advantage_fn);
    }
    ForwardCache cache;
    Eigen::MatrixXd logits = forward(net, views, &cache);
    Eigen::MatrixXd dlogits(num_actions, long(batch.size()));
    double loss = 0.0, mean_abs_w = 0.0;
    for (size_t i = 0; i < batch.size(); ++i) {
      Eigen::VectorXd target = Eigen::VectorXd::Zero(num_actions);
      target[action_id(batch[i]->action, tmpl.config)] = 1.0;
      CeResult ce = softmax_ce(logits.col(long(i)), target, weights[i]);
      loss += ce.loss / double(batch.size());
      mean_abs_w += std::abs(weights[i]) / double(batch.size());
      dlogits.col(long(i)) = ce.dlogits / double(batch.size());
    }
    if (!std::isfinite(loss))
      throw TrainingError("teacher refinement diverged at gradient step " +
                          std::to_string(step));
    MlpGrad grad(net);
    backward(net, cache, dlogits, grad);
    opt.step(pack, ParamPack::flatten_grads({&grad}));
    if (step % report_every == 0 || step == cfg.gradient_steps - 1)
      out.rows.push_back({env_step, step, to_string(cfg.heuristic), cfg.p_plus, mean_abs_w,
                          loss});
  }
  return out;
}

void SelectionLoop::on_episode_end() {
  std::vector<TransitionLabel> labels = categorize(episode_, cfg_.heuristic);
  for (size_t i = 0; i < episode_.size(); ++i) buffers_.insert(std::move(episode_[i]), labels[i]);
  episode_.clear();
}

bool SelectionLoop::maybe_refine(long env_step, TeacherParams& teacher, const QNet* q_net,
                                 const ActionCatalog* catalog) {
  if (env_step == 0 || env_step % cfg_.refine_every_k != 0) return false;
  RefineOutcome outcome =
      refine_teacher(teacher, buffers_, cfg_, q_net, catalog, tmpl_, env_step, uint64_t(rounds_));
  ++rounds_;
  for (auto& row : outcome.rows) report_.push_back(std::move(row));
  return !outcome.skipped;
}

}  // namespace hanalab
