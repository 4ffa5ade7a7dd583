#pragma once

#include <map>
#include <vector>

#include "hanalab/agent.hpp"
#include "hanalab/codec.hpp"
#include "hanalab/dataset.hpp"
#include "hanalab/nn.hpp"

namespace hanalab {

// Text-conditioned action classifier: the trainable stand-in for a
// fine-tuned language model. Exposes a probability distribution over action
// ids for distillation and acts as a standalone agent.
struct TeacherParams {
  Mlp net;  // featurize(obs_text, hash_dim) -> one logit per action id
  int hash_dim = 4096;
  std::string template_version{kTextTemplateVersion};

  int num_actions() const { return net.output_dim(); }
  void check_compatible(const GameConfig& cfg) const;
  Eigen::VectorXd logits(const std::string& obs_text) const;
};

// Softmax over the teacher logits; with mask_illegal the distribution is
// zeroed outside legal_ids and renormalized.
Eigen::VectorXd teacher_dist(const TeacherParams& params, const std::string& obs_text,
                             const std::vector<int>& legal_ids, bool mask_illegal);

struct TeacherCurvePoint {
  int epoch = 0;
  double train_loss = 0.0;
  double val_top1 = 0.0;
  double gameplay_mean = 0.0;  // NaN-free: only meaningful when has_gameplay
  bool has_gameplay = false;
};

struct TeacherTrainOptions {
  GameConfig game;
  TrainConfig train;
  std::vector<int> hidden = {256, 256};
  int hash_dim = 4096;
  // Checkpoint selection uses per-epoch gameplay score when enabled,
  // validation top-1 otherwise.
  bool select_by_gameplay = false;
  long gameplay_games = 100;
  uint64_t gameplay_seed = 424242;
  int threads = 0;
};

struct TeacherTrainResult {
  TeacherParams params;  // best checkpoint
  std::vector<TeacherCurvePoint> curve;
  int best_epoch = 0;
};

TeacherTrainResult train_teacher(const std::vector<DatasetRecord>& train,
                                 const std::vector<DatasetRecord>& val,
                                 const TeacherTrainOptions& options);

// Fraction of records whose label is within the k highest unmasked logits,
// for k in 1..k_max.
std::map<int, double> eval_topk(const TeacherParams& params,
                                const std::vector<DatasetRecord>& test, int k_max = 5);

// Mean fraction of the k highest unmasked logits that are legal actions.
std::map<int, double> eval_legal_overlap(const TeacherParams& params,
                                         const std::vector<DatasetRecord>& test, int k_max = 5);

void save_teacher_checkpoint(const std::filesystem::path& path, const TeacherParams& params,
                             uint64_t rng_seed);
TeacherParams load_teacher_checkpoint(const std::filesystem::path& path);

std::string teacher_curve_csv(const std::vector<TeacherCurvePoint>& curve);

class TeacherAgent : public Agent {
 public:
  TeacherAgent(TeacherParams params, GameConfig config, bool mask_raw_choice = false,
               std::string name = "teacher")
      : params_(std::move(params)),
        config_(std::move(config)),
        mask_raw_(mask_raw_choice),
        name_(std::move(name)) {
    tmpl_.config = config_;
  }

  std::string name() const override { return name_; }
  Action act(const Observation& obs, const PartnerKnowledge&, SplitMix64&) const override;
  Action act_legal(const Observation& obs, const PartnerKnowledge&, SplitMix64&) const override;
  void check_compatible(const GameConfig& cfg) const override {
    params_.check_compatible(cfg);
  }
  const TeacherParams& params() const { return params_; }

 private:
  TeacherParams params_;
  GameConfig config_;
  TextTemplate tmpl_;
  bool mask_raw_;
  std::string name_;
};

}  // namespace hanalab
