#include "hanalab/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hanalab/json_io.hpp"
#include "hanalab/parallel.hpp"

namespace hanalab {

IllegalPolicy illegal_policy_from_string(const std::string& s) {
  if (s == "mask-renormalize") return IllegalPolicy::MaskRenormalize;
  if (s == "forfeit-as-random-legal") return IllegalPolicy::ForfeitRandomLegal;
  throw ConfigError("unknown illegal policy '" + s + "'");
}

std::string to_string(IllegalPolicy p) {
  return p == IllegalPolicy::MaskRenormalize ? "mask-renormalize" : "forfeit-as-random-legal";
}

nlohmann::json EvalReport::to_json() const {
  nlohmann::json j{{"agent", agent},
                   {"n_games", n_games},
                   {"mean_score", mean_score},
                   {"stderr", stderr_score},
                   {"max_score", max_score},
                   {"illegal_attempt_rate", illegal_attempt_rate}};
  if (!topk_accuracy.empty()) {
    nlohmann::json t = nlohmann::json::object();
    for (const auto& [k, v] : topk_accuracy) t[std::to_string(k)] = v;
    j["topk_accuracy"] = t;
  }
  if (!legal_overlap.empty()) {
    nlohmann::json t = nlohmann::json::object();
    for (const auto& [k, v] : legal_overlap) t[std::to_string(k)] = v;
    j["legal_overlap"] = t;
  }
  return j;
}

std::string EvalReport::csv_header() const {
  std::string h = "agent,n_games,mean_score,stderr,max_score,illegal_attempt_rate";
  for (const auto& [k, v] : topk_accuracy) h += ",top" + std::to_string(k) + "_accuracy";
  for (const auto& [k, v] : legal_overlap) h += ",top" + std::to_string(k) + "_legal_overlap";
  return h;
}

std::string EvalReport::csv_row() const {
  std::string r = agent + "," + std::to_string(n_games) + "," + format_real(mean_score) + "," +
                  format_real(stderr_score) + "," + std::to_string(max_score) + "," +
                  format_real(illegal_attempt_rate);
  for (const auto& [k, v] : topk_accuracy) r += "," + format_real(v);
  for (const auto& [k, v] : legal_overlap) r += "," + format_real(v);
  return r;
}

namespace {

struct GameOutcome {
  int score = 0;
  long decisions = 0;
  long illegal_attempts = 0;
};

// One full game with `agents[j]` seated at position j.
GameOutcome play_game(const std::vector<const Agent*>& seats, const GameConfig& config,
                      uint64_t deck_seed, uint64_t agent_seed, IllegalPolicy policy) {
  GameConfig cfg = config;
  cfg.seed = deck_seed;
  GameState state = new_game(cfg);
  SplitMix64 rng(agent_seed);
  GameOutcome out;
  while (!state.is_terminal()) {
    const int seat = state.current_player;
    const Agent& agent = *seats[size_t(seat)];
    Observation obs = observe(state, seat);
    PartnerKnowledge pk = observe_partner_knowledge(state, seat);
    Action action = agent.act(obs, pk, rng);
    ++out.decisions;
    const int raw_id = action_id(action, cfg);
    if (std::find(obs.legal_action_ids.begin(), obs.legal_action_ids.end(), raw_id) ==
        obs.legal_action_ids.end()) {
      ++out.illegal_attempts;
      if (policy == IllegalPolicy::MaskRenormalize) {
        action = agent.act_legal(obs, pk, rng);
      } else {
        const auto& ids = obs.legal_action_ids;
        action = id_action(ids[size_t(rng.next_below(ids.size()))], cfg);
      }
    }
    state = apply_action(state, action).state;
  }
  out.score = state.score();
  return out;
}

EvalReport summarize(const std::string& name, const std::vector<GameOutcome>& outcomes) {
  EvalReport rep;
  rep.agent = name;
  rep.n_games = long(outcomes.size());
  long decisions = 0, attempts = 0;
  double sum = 0;
  for (const auto& o : outcomes) {
    sum += o.score;
    rep.max_score = std::max(rep.max_score, o.score);
    decisions += o.decisions;
    attempts += o.illegal_attempts;
  }
  rep.mean_score = sum / double(std::max<long>(rep.n_games, 1));
  double sq = 0;
  for (const auto& o : outcomes) sq += (o.score - rep.mean_score) * (o.score - rep.mean_score);
  if (rep.n_games > 1)
    rep.stderr_score = std::sqrt(sq / double(rep.n_games - 1)) / std::sqrt(double(rep.n_games));
  rep.illegal_attempt_rate = decisions > 0 ? double(attempts) / double(decisions) : 0.0;
  return rep;
}

}  // namespace

EvalReport eval_gameplay(const Agent& agent, const GameConfig& config, long n_games,
                         uint64_t seed, IllegalPolicy policy, int threads) {
  agent.check_compatible(config);
  std::vector<const Agent*> seats(size_t(config.num_players), &agent);
  std::vector<GameOutcome> outcomes(size_t(std::max<long>(n_games, 0)));
  parallel_for(
      n_games,
      [&](long g) {
        outcomes[size_t(g)] = play_game(seats, config, derive_seed(seed, uint64_t(2 * g)),
                                        derive_seed(seed, uint64_t(2 * g + 1)), policy);
      },
      threads);
  return summarize(agent.name(), outcomes);
}

std::vector<CrossplayCell> crossplay(const std::vector<const Agent*>& agents,
                                     const std::vector<int>& player_counts, long n_games,
                                     uint64_t seed, const GameConfig& base_config,
                                     IllegalPolicy policy, int threads) {
  if (agents.empty()) throw ConfigError("crossplay needs at least one agent");
  std::vector<CrossplayCell> cells;
  for (int players : player_counts) {
    GameConfig cfg = base_config;
    cfg.num_players = players;
    cfg.hand_size = 0;  // re-derive from the player count
    cfg.validate();
    for (const Agent* row : agents) {
      for (const Agent* col : agents) {
        try {
          row->check_compatible(cfg);
          col->check_compatible(cfg);
        } catch (const CompatibilityError& e) {
          throw CompatibilityError("crossplay cell (" + row->name() + ", " + col->name() +
                                   ") at " + std::to_string(players) + " players: " + e.what());
        }
        std::vector<GameOutcome> outcomes(size_t(std::max<long>(n_games, 0)));
        parallel_for(
            n_games,
            [&](long g) {
              // seats alternate between the two agents, rotated per game
              std::vector<const Agent*> seats(static_cast<size_t>(players));
              const Agent* pair[2] = {row, col};
              for (int j = 0; j < players; ++j) seats[size_t(j)] = pair[(g + j) % 2];
              outcomes[size_t(g)] =
                  play_game(seats, cfg, derive_seed(seed, uint64_t(2 * g)),
                            derive_seed(seed, uint64_t(2 * g + 1)), policy);
            },
            threads);
        EvalReport rep = summarize(row->name() + "|" + col->name(), outcomes);
        cells.push_back({row->name(), col->name(), players, rep.mean_score, rep.stderr_score,
                         rep.n_games});
      }
    }
  }
  return cells;
}

std::string crossplay_csv(const std::vector<CrossplayCell>& cells) {
  std::string out = "row_agent,col_agent,player_count,mean,stderr,n\n";
  for (const auto& c : cells)
    out += c.row_agent + "," + c.col_agent + "," + std::to_string(c.player_count) + "," +
           format_real(c.mean) + "," + format_real(c.stderr_score) + "," + std::to_string(c.n) +
           "\n";
  return out;
}

}  // namespace hanalab
