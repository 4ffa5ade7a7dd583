#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hanalab/errors.hpp"
#include "hanalab/rng.hpp"

namespace hanalab {

// Rules-exact, deterministic Hanabi state machine for 2-5 players.
//
// Hand layout convention: index 0 is the newest card. Drawn cards are
// inserted at slot 0 and removal shifts the remaining cards left, so with a
// full five-card hand the oldest card sits at index 4.

struct GameConfig {
  int num_players = 2;
  int colors = 5;
  int ranks = 5;
  std::vector<int> rank_multiplicities = {3, 2, 2, 2, 1};
  int hand_size = 0;  // 0 = derive from num_players (5 for 2-3, 4 for 4-5)
  int max_hint_tokens = 8;
  int max_life_tokens = 3;
  bool bomb_out_zeroes_score = true;
  bool discard_in_obs = false;  // whether observations carry the discard pile
  uint64_t seed = 0;

  int effective_hand_size() const {
    if (hand_size > 0) return hand_size;
    return num_players <= 3 ? 5 : 4;
  }
  int deck_size() const {
    int per_color = 0;
    for (int m : rank_multiplicities) per_color += m;
    return per_color * colors;
  }
  int max_score() const { return colors * ranks; }
  // Total canonical action ids: 2H + (N-1)(C+R).
  int total_action_ids() const {
    return 2 * effective_hand_size() + (num_players - 1) * (colors + ranks);
  }
  void validate() const;

  bool operator==(const GameConfig&) const = default;
};

struct Card {
  int color = -1;  // 0..colors-1
  int rank = 0;    // 1..ranks

  bool operator==(const Card&) const = default;
  bool operator<(const Card& o) const {
    return color != o.color ? color < o.color : rank < o.rank;
  }
};

// What one player can deduce about one of their own cards from hints.
struct CardKnowledge {
  uint32_t possible_colors = 0;  // bitset over color indices
  uint32_t possible_ranks = 0;   // bitset, bit (r-1) for rank r
  std::optional<int> hinted_color;
  std::optional<int> hinted_rank;

  static CardKnowledge initial(const GameConfig& cfg) {
    CardKnowledge k;
    k.possible_colors = (1u << cfg.colors) - 1;
    k.possible_ranks = (1u << cfg.ranks) - 1;
    return k;
  }

  bool color_possible(int c) const { return (possible_colors >> c) & 1u; }
  bool rank_possible(int r) const { return (possible_ranks >> (r - 1)) & 1u; }
  int num_possible_colors() const { return __builtin_popcount(possible_colors); }
  int num_possible_ranks() const { return __builtin_popcount(possible_ranks); }
  int num_possible_pairs() const { return num_possible_colors() * num_possible_ranks(); }
  bool fully_identified() const { return num_possible_pairs() == 1; }

  bool operator==(const CardKnowledge&) const = default;
};

enum class ActionKind { Play, Discard, HintColor, HintRank };

// Canonical id ordering: Discard 0..H-1, Play H..2H-1, HintColor blocks per
// target offset, then HintRank blocks per target offset.
struct Action {
  ActionKind kind = ActionKind::Play;
  int card_index = -1;     // Play/Discard
  int target_offset = -1;  // hints: 1..num_players-1, relative to the actor
  int hint_value = -1;     // color index, or rank

  static Action play(int index) { return {ActionKind::Play, index, -1, -1}; }
  static Action discard(int index) { return {ActionKind::Discard, index, -1, -1}; }
  static Action hint_color(int offset, int color) {
    return {ActionKind::HintColor, -1, offset, color};
  }
  static Action hint_rank(int offset, int rank) {
    return {ActionKind::HintRank, -1, offset, rank};
  }

  bool operator==(const Action&) const = default;
};

int action_id(const Action& a, const GameConfig& cfg);
Action id_action(int id, const GameConfig& cfg);

// Public outcome of the most recent action. Everything here is visible to
// every player at the table.
struct ActionOutcome {
  std::optional<Card> revealed;     // the card played or discarded
  std::optional<bool> success;      // plays only
  std::vector<int> touched;         // hints: hand indices of the hinted value
  bool tightened = false;           // hints: some possibility set strictly shrank
  bool operator==(const ActionOutcome&) const = default;
};

struct LastAction {
  int actor = -1;  // absolute player index
  Action action;
  ActionOutcome outcome;
  bool operator==(const LastAction&) const = default;
};

enum class TerminalReason { None, BombedOut, AllFireworksComplete, DeckExhausted };

struct HandSlot {
  Card card;
  CardKnowledge knowledge;
  bool operator==(const HandSlot&) const = default;
};

struct GameState {
  GameConfig config;
  std::vector<Card> deck;  // back() is the next card drawn
  std::vector<std::vector<HandSlot>> hands;
  std::vector<int> fireworks;       // per color, 0..ranks
  std::vector<Card> discard_pile;   // kept sorted (canonical multiset)
  int hint_tokens = 0;
  int life_tokens = 0;
  int current_player = 0;
  int turns_after_deck_empty = 0;
  int turn_count = 0;
  TerminalReason terminal_reason = TerminalReason::None;
  std::optional<LastAction> last_action;

  bool is_terminal() const { return terminal_reason != TerminalReason::None; }
  int score() const;

  bool operator==(const GameState&) const = default;
};

struct Observation {
  int viewer = 0;
  int num_players = 2;
  // others_hands[k-1] is the visible hand of the player at offset k.
  std::vector<std::vector<Card>> others_hands;
  std::vector<CardKnowledge> own_knowledge;
  std::vector<int> fireworks;
  int hint_tokens = 0;
  int life_tokens = 0;
  int deck_size = 0;
  std::optional<std::vector<Card>> discard_pile;  // absent under the ablation
  std::optional<LastAction> last_action;
  bool current_player = false;
  std::vector<int> legal_action_ids;  // recomputed, never parsed

  int hand_size() const { return int(own_knowledge.size()); }
  bool operator==(const Observation&) const = default;
};

struct OracleFeatures {
  bool reward_positive = false;
  bool knowledge_tightened = false;
  bool fireworks_changed = false;
  bool operator==(const OracleFeatures&) const = default;
};

struct Transition {
  Observation obs;
  Action action;
  double reward = 0.0;
  Observation next_obs;
  bool done = false;
  OracleFeatures oracle_features;
};

enum class EventKind { CardPlayed, CardMisplayed, CardDiscarded, CardDrawn, HintGiven, HintTokenRestored, GameEnded };

struct Event {
  EventKind kind;
  int player = -1;
  std::optional<Card> card;
  std::vector<int> touched;
  TerminalReason reason = TerminalReason::None;
};

struct StepResult {
  GameState state;
  double reward = 0.0;
  std::vector<Event> events;
};

GameState new_game(const GameConfig& config);

// Legal actions for `player`; empty unless it is their turn. Throws
// TerminalStateError on finished games.
std::vector<Action> legal_actions(const GameState& state, int player);
std::vector<int> legal_action_ids(const GameState& state, int player);

// Applies a legal action and returns the successor state, the per-step score
// delta (with the terminal bomb-out correction so that cumulative episode
// reward equals the final score), and the events raised.
StepResult apply_action(const GameState& state, const Action& action);

Observation observe(const GameState& state, int player);

// Derived from the transition tuple only; no privileged engine state.
OracleFeatures oracle_features_of(const Observation& obs, const Action& action, double reward,
                                  const Observation& next_obs);

// Stable byte-exact encoding of a full state; used for determinism checks
// and state hashing.
std::string canonical_state_string(const GameState& state);

}  // namespace hanalab
