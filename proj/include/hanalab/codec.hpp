#pragma once

#include <array>
#include <string>
#include <string_view>

#include "hanalab/engine.hpp"

namespace hanalab {

// Deterministic, bijective rendering of observations and actions to
// canonical lowercase text, and parsers back to structured form. The
// concrete grammar is documented in docs/text-format.md and versioned;
// datasets record the version and loading under a different one is an error.

inline constexpr std::string_view kTextTemplateVersion = "hanabi-text/1";

inline constexpr std::array<std::string_view, 5> kColorNames = {"red", "yellow", "green",
                                                                "white", "blue"};
inline constexpr std::string_view kColorInitials = "rygwb";

struct TextTemplate {
  GameConfig config;
  std::string version = std::string(kTextTemplateVersion);
};

std::string render_observation(const Observation& obs, const TextTemplate& tmpl);

// Inverse of render_observation for every encoded field; legal_action_ids
// are recomputed from the parsed content, never read from the text. Throws
// ParseError (with line/column) on malformed input and VersionError when the
// template version is unknown.
Observation parse_observation(const std::string& text, const TextTemplate& tmpl);

std::string render_action(const Action& a);
Action parse_action(const std::string& text, const GameConfig& config);

// Legal ids derived from observation content alone; matches the engine's
// legal_action_ids whenever the observation came from observe().
std::vector<int> legal_ids_from_observation(const Observation& obs, const GameConfig& config);

}  // namespace hanalab
