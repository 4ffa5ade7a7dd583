#pragma once

#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "hanalab/agent.hpp"

namespace hanalab {

enum class IllegalPolicy { MaskRenormalize, ForfeitRandomLegal };

IllegalPolicy illegal_policy_from_string(const std::string& s);
std::string to_string(IllegalPolicy p);

struct EvalReport {
  std::string agent;
  long n_games = 0;
  double mean_score = 0.0;
  double stderr_score = 0.0;  // sample sd / sqrt(n)
  int max_score = 0;
  double illegal_attempt_rate = 0.0;
  std::map<int, double> topk_accuracy;  // model agents only
  std::map<int, double> legal_overlap;

  nlohmann::json to_json() const;
  std::string csv_header() const;
  std::string csv_row() const;
};

// Self-play of `agent` in every seat over n seeded games. Illegal raw
// choices are resolved per `policy` and counted in illegal_attempt_rate.
EvalReport eval_gameplay(const Agent& agent, const GameConfig& config, long n_games,
                         uint64_t seed, IllegalPolicy policy = IllegalPolicy::MaskRenormalize,
                         int threads = 0);

struct CrossplayCell {
  std::string row_agent;
  std::string col_agent;
  int player_count = 0;
  double mean = 0.0;
  double stderr_score = 0.0;
  long n = 0;
};

// Every (row, col) agent pair at every player count; seats alternate between
// the two agents round-robin over games, so the diagonal is self-play.
// Throws CompatibilityError naming the agent when a fixed head cannot play
// at a requested player count.
std::vector<CrossplayCell> crossplay(const std::vector<const Agent*>& agents,
                                     const std::vector<int>& player_counts, long n_games,
                                     uint64_t seed, const GameConfig& base_config,
                                     IllegalPolicy policy = IllegalPolicy::MaskRenormalize,
                                     int threads = 0);

std::string crossplay_csv(const std::vector<CrossplayCell>& cells);

}  // namespace hanalab
