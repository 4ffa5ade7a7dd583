#include "hanalab/expert_bot.hpp"

namespace hanalab {

namespace {

bool playable_now(const std::vector<int>& fireworks, const Card& c) {
  return fireworks[size_t(c.color)] + 1 == c.rank;
}

// Every knowledge-consistent identity is playable on the current fireworks.
bool surely_playable(const CardKnowledge& k, const std::vector<int>& fireworks, int colors,
                     int ranks) {
  for (int c = 0; c < colors; ++c) {
    if (!k.color_possible(c)) continue;
    for (int r = 1; r <= ranks; ++r)
      if (k.rank_possible(r) && fireworks[size_t(c)] + 1 != r) return false;
  }
  return true;
}

// Every knowledge-consistent identity is already on the fireworks.
bool surely_useless(const CardKnowledge& k, const std::vector<int>& fireworks, int colors,
                    int ranks) {
  for (int c = 0; c < colors; ++c) {
    if (!k.color_possible(c)) continue;
    for (int r = 1; r <= ranks; ++r)
      if (k.rank_possible(r) && fireworks[size_t(c)] < r) return false;
  }
  return true;
}

}  // namespace

PartnerKnowledge observe_partner_knowledge(const GameState& state, int player) {
  PartnerKnowledge pk;
  for (int k = 1; k < state.config.num_players; ++k) {
    const auto& hand = state.hands[size_t((player + k) % state.config.num_players)];
    std::vector<CardKnowledge> slots;
    slots.reserve(hand.size());
    for (const HandSlot& sl : hand) slots.push_back(sl.knowledge);
    pk.hands.push_back(std::move(slots));
  }
  return pk;
}

Action expert_act(const Observation& obs, const PartnerKnowledge& partners,
                  const GameConfig& config) {
  const int colors = config.colors;
  const int ranks = config.ranks;

  // 1. guaranteed play
  for (int i = 0; i < obs.hand_size(); ++i)
    if (surely_playable(obs.own_knowledge[size_t(i)], obs.fireworks, colors, ranks))
      return Action::play(i);

  // 2. hint a playable partner card that is not pinned down yet
  if (obs.hint_tokens > 0) {
    for (int k = 1; k < obs.num_players; ++k) {
      const auto& hand = obs.others_hands[size_t(k - 1)];
      const auto& knowledge = partners.hands[size_t(k - 1)];
      for (size_t j = 0; j < hand.size(); ++j) {
        if (!playable_now(obs.fireworks, hand[j])) continue;
        const CardKnowledge& kn = knowledge[j];
        if (kn.fully_identified()) continue;
        if (kn.num_possible_ranks() > 1) return Action::hint_rank(k, hand[j].rank);
        return Action::hint_color(k, hand[j].color);
      }
    }
  }

  // 3. discard: known-useless first, then oldest unhinted, then oldest
  if (obs.hint_tokens < config.max_hint_tokens && obs.hand_size() > 0) {
    for (int i = 0; i < obs.hand_size(); ++i)
      if (surely_useless(obs.own_knowledge[size_t(i)], obs.fireworks, colors, ranks))
        return Action::discard(i);
    for (int i = obs.hand_size() - 1; i >= 0; --i) {
      const CardKnowledge& kn = obs.own_knowledge[size_t(i)];
      if (!kn.hinted_color && !kn.hinted_rank) return Action::discard(i);
    }
    return Action::discard(obs.hand_size() - 1);
  }

  // 4. stall hint: the rank of the next player's newest card
  if (obs.hint_tokens > 0)
    for (int k = 1; k < obs.num_players; ++k)
      if (!obs.others_hands[size_t(k - 1)].empty())
        return Action::hint_rank(k, obs.others_hands[size_t(k - 1)][0].rank);

  // Unreachable in any playable state; keeps the function total.
  return Action::play(0);
}

}  // namespace hanalab
