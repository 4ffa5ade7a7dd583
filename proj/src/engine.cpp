#include "hanalab/engine.hpp"

#include <algorithm>
#include <sstream>

namespace hanalab {

void GameConfig::validate() const {
  if (num_players < 2 || num_players > 5)
    throw ConfigError("num_players must be in 2..5, got " + std::to_string(num_players));
  if (colors < 1 || colors > 5)
    throw ConfigError("colors must be in 1..5, got " + std::to_string(colors));
  if (ranks < 1 || ranks > 5)
    throw ConfigError("ranks must be in 1..5, got " + std::to_string(ranks));
  if (int(rank_multiplicities.size()) != ranks)
    throw ConfigError("rank_multiplicities must have one entry per rank");
  for (int m : rank_multiplicities)
    if (m < 1) throw ConfigError("rank multiplicities must be positive");
  if (max_hint_tokens < 1 || max_life_tokens < 1)
    throw ConfigError("token maxima must be positive");
  if (hand_size < 0) throw ConfigError("hand_size must be non-negative");
  if (effective_hand_size() * num_players > deck_size())
    throw ConfigError("hand_size * num_players exceeds deck size");
}

int GameState::score() const {
  if (terminal_reason == TerminalReason::BombedOut && config.bomb_out_zeroes_score) return 0;
  int s = 0;
  for (int h : fireworks) s += h;
  return s;
}

int action_id(const Action& a, const GameConfig& cfg) {
  const int h = cfg.effective_hand_size();
  const int n = cfg.num_players;
  switch (a.kind) {
    case ActionKind::Discard:
      if (a.card_index < 0 || a.card_index >= h) throw std::out_of_range("discard index");
      return a.card_index;
    case ActionKind::Play:
      if (a.card_index < 0 || a.card_index >= h) throw std::out_of_range("play index");
      return h + a.card_index;
    case ActionKind::HintColor:
      if (a.target_offset < 1 || a.target_offset >= n) throw std::out_of_range("hint offset");
      if (a.hint_value < 0 || a.hint_value >= cfg.colors) throw std::out_of_range("hint color");
      return 2 * h + (a.target_offset - 1) * cfg.colors + a.hint_value;
    case ActionKind::HintRank:
      if (a.target_offset < 1 || a.target_offset >= n) throw std::out_of_range("hint offset");
      if (a.hint_value < 1 || a.hint_value > cfg.ranks) throw std::out_of_range("hint rank");
      return 2 * h + (n - 1) * cfg.colors + (a.target_offset - 1) * cfg.ranks +
             (a.hint_value - 1);
  }
  throw std::out_of_range("bad action kind");
}

Action id_action(int id, const GameConfig& cfg) {
  const int h = cfg.effective_hand_size();
  const int n = cfg.num_players;
  if (id < 0 || id >= cfg.total_action_ids())
    throw std::out_of_range("action id " + std::to_string(id) + " out of range");
  if (id < h) return Action::discard(id);
  if (id < 2 * h) return Action::play(id - h);
  int rest = id - 2 * h;
  const int color_block = (n - 1) * cfg.colors;
  if (rest < color_block)
    return Action::hint_color(rest / cfg.colors + 1, rest % cfg.colors);
  rest -= color_block;
  return Action::hint_rank(rest / cfg.ranks + 1, rest % cfg.ranks + 1);
}

namespace {

void insert_sorted(std::vector<Card>& pile, const Card& c) {
  pile.insert(std::upper_bound(pile.begin(), pile.end(), c), c);
}

void draw_card(GameState& s, int player, std::vector<Event>& events) {
  if (s.deck.empty()) return;
  Card c = s.deck.back();
  s.deck.pop_back();
  s.hands[player].insert(s.hands[player].begin(), {c, CardKnowledge::initial(s.config)});
  events.push_back({EventKind::CardDrawn, player, c, {}, TerminalReason::None});
}

bool all_fireworks_complete(const GameState& s) {
  for (int h : s.fireworks)
    if (h < s.config.ranks) return false;
  return true;
}

}  // namespace

GameState new_game(const GameConfig& config) {
  config.validate();
  GameState s;
  s.config = config;
  for (int c = 0; c < config.colors; ++c)
    for (int r = 1; r <= config.ranks; ++r)
      for (int m = 0; m < config.rank_multiplicities[r - 1]; ++m)
        s.deck.push_back({c, r});
  SplitMix64 rng(config.seed);
  fisher_yates_shuffle(s.deck, rng);

  s.hands.resize(config.num_players);
  s.fireworks.assign(config.colors, 0);
  s.hint_tokens = config.max_hint_tokens;
  s.life_tokens = config.max_life_tokens;
  std::vector<Event> ignored;
  for (int round = 0; round < config.effective_hand_size(); ++round)
    for (int p = 0; p < config.num_players; ++p) draw_card(s, p, ignored);
  return s;
}

std::vector<Action> legal_actions(const GameState& state, int player) {
  if (state.is_terminal()) throw TerminalStateError("legal_actions on a terminal state");
  std::vector<Action> out;
  if (player != state.current_player) return out;
  const auto& cfg = state.config;
  const int held = int(state.hands[player].size());
  if (state.hint_tokens < cfg.max_hint_tokens)
    for (int i = 0; i < held; ++i) out.push_back(Action::discard(i));
  for (int i = 0; i < held; ++i) out.push_back(Action::play(i));
  if (state.hint_tokens > 0) {
    for (int k = 1; k < cfg.num_players; ++k) {
      const auto& hand = state.hands[(player + k) % cfg.num_players];
      for (int c = 0; c < cfg.colors; ++c)
        if (std::any_of(hand.begin(), hand.end(),
                        [&](const HandSlot& sl) { return sl.card.color == c; }))
          out.push_back(Action::hint_color(k, c));
    }
    for (int k = 1; k < cfg.num_players; ++k) {
      const auto& hand = state.hands[(player + k) % cfg.num_players];
      for (int r = 1; r <= cfg.ranks; ++r)
        if (std::any_of(hand.begin(), hand.end(),
                        [&](const HandSlot& sl) { return sl.card.rank == r; }))
          out.push_back(Action::hint_rank(k, r));
    }
  }
  return out;
}

std::vector<int> legal_action_ids(const GameState& state, int player) {
  std::vector<int> ids;
  for (const Action& a : legal_actions(state, player)) ids.push_back(action_id(a, state.config));
  return ids;
}

StepResult apply_action(const GameState& state, const Action& action) {
  const auto legal = legal_actions(state, state.current_player);
  if (std::find(legal.begin(), legal.end(), action) == legal.end()) {
    std::ostringstream msg;
    msg << "action id " << action_id(action, state.config) << " is not legal for player "
        << state.current_player;
    throw IllegalActionError(msg.str());
  }

  StepResult result;
  result.state = state;
  GameState& s = result.state;
  const auto& cfg = s.config;
  const int actor = s.current_player;
  const bool deck_empty_at_start = s.deck.empty();
  const int score_before = s.score();

  ActionOutcome outcome;
  switch (action.kind) {
    case ActionKind::Play: {
      Card card = s.hands[actor][action.card_index].card;
      s.hands[actor].erase(s.hands[actor].begin() + action.card_index);
      outcome.revealed = card;
      if (s.fireworks[card.color] + 1 == card.rank) {
        s.fireworks[card.color] = card.rank;
        result.reward += 1.0;
        outcome.success = true;
        result.events.push_back({EventKind::CardPlayed, actor, card, {}, TerminalReason::None});
        if (card.rank == cfg.ranks && s.hint_tokens < cfg.max_hint_tokens) {
          ++s.hint_tokens;
          result.events.push_back({EventKind::HintTokenRestored, actor, {}, {}, TerminalReason::None});
        }
      } else {
        insert_sorted(s.discard_pile, card);
        --s.life_tokens;
        outcome.success = false;
        result.events.push_back({EventKind::CardMisplayed, actor, card, {}, TerminalReason::None});
      }
      draw_card(s, actor, result.events);
      break;
    }
    case ActionKind::Discard: {
      Card card = s.hands[actor][action.card_index].card;
      s.hands[actor].erase(s.hands[actor].begin() + action.card_index);
      insert_sorted(s.discard_pile, card);
      ++s.hint_tokens;
      outcome.revealed = card;
      result.events.push_back({EventKind::CardDiscarded, actor, card, {}, TerminalReason::None});
      draw_card(s, actor, result.events);
      break;
    }
    case ActionKind::HintColor:
    case ActionKind::HintRank: {
      --s.hint_tokens;
      const int target = (actor + action.target_offset) % cfg.num_players;
      auto& hand = s.hands[target];
      for (int j = 0; j < int(hand.size()); ++j) {
        CardKnowledge& k = hand[j].knowledge;
        if (action.kind == ActionKind::HintColor) {
          const uint32_t bit = 1u << action.hint_value;
          if (hand[j].card.color == action.hint_value) {
            outcome.touched.push_back(j);
            if (k.possible_colors != bit) outcome.tightened = true;
            k.possible_colors = bit;
            k.hinted_color = action.hint_value;
          } else if (k.possible_colors & bit) {
            outcome.tightened = true;
            k.possible_colors &= ~bit;
          }
        } else {
          const uint32_t bit = 1u << (action.hint_value - 1);
          if (hand[j].card.rank == action.hint_value) {
            outcome.touched.push_back(j);
            if (k.possible_ranks != bit) outcome.tightened = true;
            k.possible_ranks = bit;
            k.hinted_rank = action.hint_value;
          } else if (k.possible_ranks & bit) {
            outcome.tightened = true;
            k.possible_ranks &= ~bit;
          }
        }
      }
      result.events.push_back({EventKind::HintGiven, actor, {}, outcome.touched, TerminalReason::None});
      break;
    }
  }

  if (deck_empty_at_start) ++s.turns_after_deck_empty;
  ++s.turn_count;
  s.current_player = (actor + 1) % cfg.num_players;
  s.last_action = LastAction{actor, action, outcome};

  if (s.life_tokens == 0) {
    s.terminal_reason = TerminalReason::BombedOut;
    if (cfg.bomb_out_zeroes_score) result.reward -= double(score_before);
  } else if (all_fireworks_complete(s)) {
    s.terminal_reason = TerminalReason::AllFireworksComplete;
  } else if (s.turns_after_deck_empty == cfg.num_players) {
    s.terminal_reason = TerminalReason::DeckExhausted;
  }
  if (s.is_terminal())
    result.events.push_back({EventKind::GameEnded, -1, {}, {}, s.terminal_reason});
  return result;
}

Observation observe(const GameState& state, int player) {
  const auto& cfg = state.config;
  if (player < 0 || player >= cfg.num_players) throw ConfigError("bad player index");
  Observation obs;
  obs.viewer = player;
  obs.num_players = cfg.num_players;
  for (int k = 1; k < cfg.num_players; ++k) {
    const auto& hand = state.hands[(player + k) % cfg.num_players];
    std::vector<Card> visible;
    visible.reserve(hand.size());
    for (const HandSlot& sl : hand) visible.push_back(sl.card);
    obs.others_hands.push_back(std::move(visible));
  }
  for (const HandSlot& sl : state.hands[player]) obs.own_knowledge.push_back(sl.knowledge);
  obs.fireworks = state.fireworks;
  obs.hint_tokens = state.hint_tokens;
  obs.life_tokens = state.life_tokens;
  obs.deck_size = int(state.deck.size());
  if (cfg.discard_in_obs) obs.discard_pile = state.discard_pile;
  obs.last_action = state.last_action;
  obs.current_player = player == state.current_player && !state.is_terminal();
  if (obs.current_player) obs.legal_action_ids = legal_action_ids(state, player);
  return obs;
}

OracleFeatures oracle_features_of(const Observation& obs, const Action& action, double reward,
                                  const Observation& next_obs) {
  OracleFeatures f;
  f.reward_positive = reward > 0.0;
  f.fireworks_changed = obs.fireworks != next_obs.fireworks;
  // The hint's effect is public: the successor observation records whether
  // any possibility set strictly shrank.
  if (next_obs.last_action && next_obs.last_action->action == action)
    f.knowledge_tightened = next_obs.last_action->outcome.tightened;
  return f;
}

namespace {

std::ostream& operator<<(std::ostream& os, const Card& c) {
  return os << c.color << '.' << c.rank;
}

void put_knowledge(std::ostream& os, const CardKnowledge& k) {
  os << k.possible_colors << '/' << k.possible_ranks << '/'
     << (k.hinted_color ? *k.hinted_color : -1) << '/' << (k.hinted_rank ? *k.hinted_rank : -1);
}

}  // namespace

std::string canonical_state_string(const GameState& s) {
  std::ostringstream os;
  os << "players=" << s.config.num_players << " colors=" << s.config.colors
     << " ranks=" << s.config.ranks << " seed=" << s.config.seed << '\n';
  os << "deck:";
  for (const Card& c : s.deck) os << ' ' << c;
  os << '\n';
  for (int p = 0; p < s.config.num_players; ++p) {
    os << "hand" << p << ':';
    for (const HandSlot& sl : s.hands[p]) {
      os << ' ' << sl.card << '[';
      put_knowledge(os, sl.knowledge);
      os << ']';
    }
    os << '\n';
  }
  os << "fireworks:";
  for (int h : s.fireworks) os << ' ' << h;
  os << "\ndiscards:";
  for (const Card& c : s.discard_pile) os << ' ' << c;
  os << "\nhints=" << s.hint_tokens << " lives=" << s.life_tokens
     << " current=" << s.current_player << " after_empty=" << s.turns_after_deck_empty
     << " turn=" << s.turn_count << " terminal=" << int(s.terminal_reason) << '\n';
  if (s.last_action) {
    const auto& la = *s.last_action;
    os << "last: actor=" << la.actor << " id=" << action_id(la.action, s.config);
    if (la.outcome.revealed) os << " card=" << *la.outcome.revealed;
    if (la.outcome.success) os << " success=" << *la.outcome.success;
    if (!la.outcome.touched.empty()) {
      os << " touched=";
      for (int t : la.outcome.touched) os << t << ',';
    }
    os << " tightened=" << la.outcome.tightened << '\n';
  }
  return os.str();
}

}  // namespace hanalab
