#pragma once

#include <functional>
#include <string>
#include <vector>

#include "hanalab/qnet.hpp"
#include "hanalab/replay.hpp"
#include "hanalab/teacher.hpp"

namespace hanalab {

// Transition-selection heuristics for in-loop teacher refinement:
//   UT  keeps everything in one uncategorized buffer;
//   OC  labels a transition useful when the oracle features fired (positive
//       reward, fireworks advanced, or a hint tightened someone's knowledge);
//   RT  walks rewards backward: when r_t > 0, every transition after the
//       previous nonzero reward (exclusive) through t is positive.
enum class Heuristic { UT, OC, RT };
enum class WeightVariant { Uniform, ExpAdv, LinAdv };
enum class TransitionLabel { Plus, Minus };

Heuristic heuristic_from_string(const std::string& s);
std::string to_string(Heuristic h);
WeightVariant weight_variant_from_string(const std::string& s);
std::string to_string(WeightVariant v);

struct SelectionConfig {
  Heuristic heuristic = Heuristic::OC;
  double p_plus = 0.9;
  long buffer_capacity = 100000;
  int d_lm = 64;               // batch size per refinement gradient step
  long refine_every_k = 5000;  // env steps between refinements
  int gradient_steps = 2000;
  WeightVariant weight_variant = WeightVariant::Uniform;
  double beta = 1.0;
  TrainConfig refine;  // optimizer settings for the teacher updates
  uint64_t seed = 0;

  void validate() const;
};

std::vector<TransitionLabel> categorize(const std::vector<Transition>& episode, Heuristic h);

struct CategorizedBuffers {
  ReplayBuffer d_plus;
  ReplayBuffer d_minus;

  explicit CategorizedBuffers(long capacity) : d_plus(capacity), d_minus(capacity) {}
  void insert(Transition t, TransitionLabel label);
  bool empty() const { return d_plus.empty() && d_minus.empty(); }
};

// Each draw picks D+ with probability p_plus (falling back to the non-empty
// buffer), then uniform within the buffer.
std::vector<const Transition*> sample_batch(const CategorizedBuffers& buffers, double p_plus,
                                            long n, SplitMix64& rng);

// Per-sample weight h(.) for the weighted cross-entropy. The exponential
// variant is clamped to [0, 1e4].
double weight(const Transition& t, WeightVariant variant, double beta,
              const std::function<double(const Transition&)>& advantage_fn);

struct RefineReportRow {
  long env_step = 0;
  long gradient_step = 0;
  std::string heuristic;
  double p_plus = 0.0;
  double mean_weight = 0.0;  // mean |h| over the batch
  double loss = 0.0;
};

std::string refine_report_jsonl(const std::vector<RefineReportRow>& rows);

struct RefineOutcome {
  bool skipped = false;
  std::vector<RefineReportRow> rows;
};

// Runs cfg.gradient_steps weighted-CE updates on batches drawn from the
// buffers. q_net supplies the advantage estimate for the non-uniform weight
// variants; refinement is skipped with a warning row when both buffers are
// empty.
RefineOutcome refine_teacher(TeacherParams& teacher, CategorizedBuffers& buffers,
                             const SelectionConfig& cfg, const QNet* q_net,
                             const ActionCatalog* catalog, const TextTemplate& tmpl,
                             long env_step, uint64_t round_index);

// Glue between the student's environment loop and teacher refinement:
// stages transitions per episode, categorizes at episode end, and refines
// every refine_every_k env steps.
class SelectionLoop {
 public:
  SelectionLoop(SelectionConfig cfg, TextTemplate tmpl)
      : cfg_(std::move(cfg)), tmpl_(std::move(tmpl)), buffers_(cfg_.buffer_capacity) {
    cfg_.validate();
  }

  void on_transition(const Transition& t) { episode_.push_back(t); }
  void on_episode_end();
  bool maybe_refine(long env_step, TeacherParams& teacher, const QNet* q_net,
                    const ActionCatalog* catalog);

  const SelectionConfig& config() const { return cfg_; }
  const CategorizedBuffers& buffers() const { return buffers_; }
  const std::vector<RefineReportRow>& report() const { return report_; }
  long refinements() const { return rounds_; }

 private:
  SelectionConfig cfg_;
  TextTemplate tmpl_;
  CategorizedBuffers buffers_;
  std::vector<Transition> episode_;
  std::vector<RefineReportRow> report_;
  long rounds_ = 0;
};

}  // namespace hanalab
