#pragma once

#include <memory>
#include <string>

#include "hanalab/engine.hpp"
#include "hanalab/expert_bot.hpp"
#include "hanalab/rng.hpp"

namespace hanalab {

// A seat at the table. Implementations must be stateless across calls and
// thread-safe for concurrent act() calls (evaluation runs games in
// parallel against shared read-only parameters).
class Agent {
 public:
  virtual ~Agent() = default;
  virtual std::string name() const = 0;

  // Raw action choice; unmasked model agents may return an illegal action.
  virtual Action act(const Observation& obs, const PartnerKnowledge& partners,
                     SplitMix64& rng) const = 0;

  // Choice restricted to legal actions; the evaluator falls back to this
  // under the mask-renormalize illegal policy.
  virtual Action act_legal(const Observation& obs, const PartnerKnowledge& partners,
                           SplitMix64& rng) const {
    return act(obs, partners, rng);
  }

  // Throws CompatibilityError when this agent cannot play under cfg.
  virtual void check_compatible(const GameConfig& cfg) const { (void)cfg; }
};

class RandomAgent : public Agent {
 public:
  std::string name() const override { return "random"; }
  Action act(const Observation& obs, const PartnerKnowledge&, SplitMix64& rng) const override {
    const auto& ids = obs.legal_action_ids;
    return id_action(ids[size_t(rng.next_below(ids.size()))], config_);
  }
  explicit RandomAgent(GameConfig config) : config_(std::move(config)) {}

 private:
  GameConfig config_;
};

class ExpertAgent : public Agent {
 public:
  std::string name() const override { return "expert"; }
  Action act(const Observation& obs, const PartnerKnowledge& partners,
             SplitMix64&) const override {
    return expert_act(obs, partners, config_);
  }
  explicit ExpertAgent(GameConfig config) : config_(std::move(config)) {}

 private:
  GameConfig config_;
};

}  // namespace hanalab
