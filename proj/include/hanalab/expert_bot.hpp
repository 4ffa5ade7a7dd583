#pragma once

#include "hanalab/engine.hpp"

namespace hanalab {

// Deterministic scripted expert used to generate training trajectories.
//
// Decision ladder, first rule that fires wins:
//   1. play the leftmost own card whose every knowledge-consistent
//      (color, rank) is playable right now;
//   2. with hint tokens available, hint a partner's playable card that is
//      not yet fully identified (rank hint unless the rank is known);
//   3. when discarding is legal, discard a known-useless card, else the
//      oldest card with no direct hints, else the oldest card;
//   4. otherwise stall: hint the rank of the next player's newest card.
//
// Ties break toward the lowest card index, then the lowest target offset.
// The output is always legal.
struct ExpertBotConfig {};

// Hint state of the other players' hands, aligned with
// Observation::others_hands. This is public information (any player can
// reconstruct it from the hint history) but it is not part of the rendered
// observation text, so it travels next to the Observation instead of in it.
struct PartnerKnowledge {
  std::vector<std::vector<CardKnowledge>> hands;
};

PartnerKnowledge observe_partner_knowledge(const GameState& state, int player);

Action expert_act(const Observation& obs, const PartnerKnowledge& partners,
                  const GameConfig& config);

}  // namespace hanalab
