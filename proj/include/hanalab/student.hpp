#pragma once

#include <memory>
#include <optional>

#include "hanalab/evaluate.hpp"
#include "hanalab/qnet.hpp"
#include "hanalab/selection.hpp"

namespace hanalab {

// Distillation weight schedule: 1 during warmup, linear to 0 over the decay
// window, 0 afterward. With gate_warmup the warmup phase trains on the
// distillation term alone; TD resumes (plus lambda-weighted distillation)
// once the decay begins.
struct DistillConfig {
  long warmup_updates = 50000;  // W
  long decay_updates = 50000;   // D
  double tau = 1.0;
  bool teacher_mask = true;
  bool gate_warmup = true;

  void validate() const {
    if (warmup_updates < 0 || decay_updates < 0)
      throw ConfigError("distillation schedule lengths must be >= 0");
    if (tau <= 0) throw ConfigError("distillation temperature must be positive");
  }
};

double lambda_schedule(long t, const DistillConfig& cfg);

struct StudentConfig {
  GameConfig game;
  std::string head = "dqn";  // or "drrn"
  int hash_dim = 4096;
  std::vector<int> hidden = {256, 256};  // dqn body
  int embedding_dim = 128;               // drrn encoders
  double gamma = 0.99;                   // drrn runs conventionally use 0.9
  long env_steps = 100000;
  int update_every = 4;
  long min_replay = 1000;
  long replay_capacity = 100000;
  double priority_fraction = 0.0;  // 0 = uniform replay sampling
  long target_sync = 1000;
  double eps_start = 1.0;
  double eps_end = 0.05;
  double eps_fraction = 0.10;  // of env_steps spent annealing
  TrainConfig train;
  long eval_every = 5000;
  long eval_games = 100;
  uint64_t eval_seed = 31337;
  int threads = 0;

  void validate() const;
  std::unique_ptr<QNet> make_net(uint64_t seed) const;
};

struct StudentCurvePoint {
  long env_steps = 0;
  long updates = 0;
  double lambda = 0.0;
  double eval_mean = 0.0;
  double eval_stderr = 0.0;
};

std::string student_curve_csv(const std::vector<StudentCurvePoint>& curve);

struct StudentTrainResult {
  std::unique_ptr<QNet> net;
  std::vector<StudentCurvePoint> curve;
  long total_updates = 0;
  long total_episodes = 0;
  bool diverged = false;  // loss went non-finite; net is the last good snapshot
};

// epsilon-greedy self-play with replay and target network. `teacher` enables
// the distillation term (and is itself updated when `selection` is given).
// `init_from` warm-starts the value net, e.g. for player-count transfer.
StudentTrainResult train_student(const StudentConfig& cfg, TeacherParams* teacher = nullptr,
                                 const DistillConfig* distill = nullptr,
                                 SelectionLoop* selection = nullptr,
                                 const QNet* init_from = nullptr);

// Greedy-over-legal policy around a value net.
class StudentAgent : public Agent {
 public:
  StudentAgent(const QNet& net, GameConfig config, std::string name = "student");

  std::string name() const override { return name_; }
  Action act(const Observation& obs, const PartnerKnowledge&, SplitMix64&) const override;
  void check_compatible(const GameConfig& cfg) const override { net_->check_compatible(cfg); }

 private:
  std::unique_ptr<QNet> net_;
  GameConfig config_;
  TextTemplate tmpl_;
  ActionCatalog catalog_;
  std::string name_;
};

void save_student_checkpoint(const std::filesystem::path& path, const QNet& net,
                             uint64_t rng_seed);
std::unique_ptr<QNet> load_student_checkpoint(const std::filesystem::path& path);

}  // namespace hanalab
