#include "hanalab/codec.hpp"

#include <algorithm>
#include <sstream>

namespace hanalab {

namespace {

std::string_view color_name(int c) { return kColorNames[size_t(c)]; }

int color_from_name(std::string_view name, const GameConfig& cfg, int line) {
  for (int c = 0; c < cfg.colors; ++c)
    if (kColorNames[size_t(c)] == name) return c;
  throw ParseError("unknown color name '" + std::string(name) + "'", line);
}

void append_card(std::ostringstream& os, const Card& c) {
  os << color_name(c.color) << c.rank;
}

void append_hand_card(std::ostringstream& os, const Card& c, const std::vector<int>& fireworks) {
  append_card(os, c);
  if (fireworks[size_t(c.color)] + 1 == c.rank) os << "*";
}

void append_card_list(std::ostringstream& os, const std::vector<Card>& cards) {
  if (cards.empty()) {
    os << "none";
    return;
  }
  for (size_t i = 0; i < cards.size(); ++i) {
    if (i) os << ", ";
    append_card(os, cards[i]);
  }
}

std::string actor_phrase(int actor, int viewer, int num_players) {
  const int offset = (actor - viewer + num_players) % num_players;
  if (offset == 0) return "you";
  return "player +" + std::to_string(offset);
}

// -- line scanner -----------------------------------------------------------

struct LineScanner {
  std::vector<std::string> lines;
  size_t pos = 0;

  explicit LineScanner(const std::string& text) {
    std::string cur;
    for (char ch : text) {
      if (ch == '\n') {
        lines.push_back(cur);
        cur.clear();
      } else {
        cur += ch;
      }
    }
    if (!cur.empty()) lines.push_back(cur);
  }

  bool done() const { return pos >= lines.size(); }
  int line_no() const { return int(pos) + 1; }
  const std::string& peek() const {
    static const std::string empty;
    return done() ? empty : lines[pos];
  }
  std::string take() {
    if (done()) throw ParseError("unexpected end of input", line_no());
    return lines[pos++];
  }
};

int parse_int(std::string_view s, int line, std::string_view what) {
  if (s.empty()) throw ParseError("expected integer for " + std::string(what), line);
  size_t i = s[0] == '-' ? 1 : 0;
  if (i == s.size()) throw ParseError("expected integer for " + std::string(what), line);
  long value = 0;
  for (; i < s.size(); ++i) {
    if (s[i] < '0' || s[i] > '9')
      throw ParseError("bad integer for " + std::string(what), line, int(i) + 1);
    value = value * 10 + (s[i] - '0');
    if (value > 1000000) throw ParseError("integer too large for " + std::string(what), line);
  }
  return s[0] == '-' ? int(-value) : int(value);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  size_t start = 0;
  while (true) {
    size_t p = s.find(sep, start);
    if (p == std::string_view::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, p - start));
    start = p + 1;
  }
}

std::string_view strip_prefix(std::string_view line, std::string_view prefix, int line_no) {
  if (line.substr(0, prefix.size()) != prefix)
    throw ParseError("expected line starting with '" + std::string(prefix) + "'", line_no);
  return line.substr(prefix.size());
}

Card parse_card(std::string_view text, const GameConfig& cfg, int line) {
  auto parts = split(text, ' ');
  if (parts.size() != 2) throw ParseError("expected '<color> <rank>'", line);
  Card c;
  c.color = color_from_name(parts[0], cfg, line);
  c.rank = parse_int(parts[1], line, "rank");
  if (c.rank < 1 || c.rank > cfg.ranks) throw ParseError("rank out of range", line);
  return c;
}

std::vector<Card> parse_card_list(std::string_view text, const GameConfig& cfg, int line) {
  std::vector<Card> out;
  if (text == "none") return out;
  for (auto item : split(text, ',')) {
    if (!item.empty() && item[0] == ' ') item.remove_prefix(1);
    out.push_back(parse_card(item, cfg, line));
  }
  return out;
}

}  // namespace

// -- actions ----------------------------------------------------------------

std::string render_action(const Action& a) {
  std::ostringstream os;
  switch (a.kind) {
    case ActionKind::Play:
      os << "play " << a.card_index;
      break;
    case ActionKind::Discard:
      os << "discard " << a.card_index;
      break;
    case ActionKind::HintColor:
      os << "hint color " << color_name(a.hint_value) << " to player +" << a.target_offset;
      break;
    case ActionKind::HintRank:
      os << "hint rank " << a.hint_value << " to player +" << a.target_offset;
      break;
  }
  return os.str();
}

Action parse_action(const std::string& text, const GameConfig& config) {
  auto words = split(text, ' ');
  auto bad = [&] { return ParseError("unrecognized action '" + text + "'", 1); };
  const int h = config.effective_hand_size();
  if (words.size() == 2 && (words[0] == "play" || words[0] == "discard")) {
    int idx = parse_int(words[1], 1, "card index");
    if (idx < 0 || idx >= h) throw ParseError("card index out of range", 1);
    return words[0] == "play" ? Action::play(idx) : Action::discard(idx);
  }
  if (words.size() == 6 && words[0] == "hint" && words[3] == "to" && words[4] == "player" &&
      !words[5].empty() && words[5][0] == '+') {
    int offset = parse_int(words[5].substr(1), 1, "target offset");
    if (offset < 1 || offset >= config.num_players)
      throw ParseError("target offset out of range", 1);
    if (words[1] == "color") return Action::hint_color(offset, color_from_name(words[2], config, 1));
    if (words[1] == "rank") {
      int r = parse_int(words[2], 1, "rank");
      if (r < 1 || r > config.ranks) throw ParseError("hint rank out of range", 1);
      return Action::hint_rank(offset, r);
    }
  }
  throw bad();
}

// -- observations -----------------------------------------------------------

std::string render_observation(const Observation& obs, const TextTemplate& tmpl) {
  const GameConfig& cfg = tmpl.config;
  std::ostringstream os;
  os << "you are player " << obs.viewer << (obs.current_player ? " to move" : " waiting");
  os << "\nhint tokens: " << obs.hint_tokens;
  os << "\nlife tokens: " << obs.life_tokens;
  os << "\nfireworks:";
  for (int c = 0; c < cfg.colors; ++c) os << ' ' << color_name(c) << obs.fireworks[c];
  for (size_t k = 0; k < obs.others_hands.size(); ++k) {
    os << "\nplayer +" << k + 1 << " hand: ";
    if (obs.others_hands[k].empty()) os << "none";
    for (size_t i = 0; i < obs.others_hands[k].size(); ++i) {
      if (i) os << ", ";
      append_hand_card(os, obs.others_hands[k][i], obs.fireworks);
    }
  }
  if (!obs.own_knowledge.empty()) {
    os << "\nyour cards:";
    for (size_t i = 0; i < obs.own_knowledge.size(); ++i) {
      const CardKnowledge& kn = obs.own_knowledge[i];
      os << ' ' << i << ':';
      for (int c = 0; c < cfg.colors; ++c)
        if (kn.color_possible(c)) os << kColorInitials[size_t(c)];
      if (kn.hinted_color) os << '!';
      os << '|';
      for (int r = 1; r <= cfg.ranks; ++r)
        if (kn.rank_possible(r)) os << r;
      if (kn.hinted_rank) os << '!';
      bool playable = true, useless = true;
      for (int c = 0; c < cfg.colors; ++c) {
        if (!kn.color_possible(c)) continue;
        for (int r = 1; r <= cfg.ranks; ++r) {
          if (!kn.rank_possible(r)) continue;
          if (obs.fireworks[size_t(c)] + 1 != r) playable = false;
          if (obs.fireworks[size_t(c)] < r) useless = false;
        }
      }
      if (playable) os << " sure-play";
      else if (useless) os << " sure-junk";
    }
  }
  os << "\ndeck size: " << obs.deck_size;
  if (obs.discard_pile) {
    os << "\ndiscards: ";
    append_card_list(os, *obs.discard_pile);
  }
  if (obs.last_action) {
    const LastAction& la = *obs.last_action;
    os << "\nlast action: " << actor_phrase(la.actor, obs.viewer, obs.num_players) << ' '
       << render_action(la.action);
    if (la.action.kind == ActionKind::Play) {
      os << " -> ";
      append_card(os, *la.outcome.revealed);
      os << (la.outcome.success.value() ? " success" : " miss");
    } else if (la.action.kind == ActionKind::Discard) {
      os << " -> ";
      append_card(os, *la.outcome.revealed);
    } else {
      os << " touching ";
      for (size_t i = 0; i < la.outcome.touched.size(); ++i) {
        if (i) os << ',';
        os << la.outcome.touched[i];
      }
      os << (la.outcome.tightened ? " new" : " known");
    }
  }
  return os.str();
}

std::vector<int> legal_ids_from_observation(const Observation& obs, const GameConfig& config) {
  std::vector<int> ids;
  if (!obs.current_player) return ids;
  const int held = obs.hand_size();
  if (obs.hint_tokens < config.max_hint_tokens)
    for (int i = 0; i < held; ++i) ids.push_back(action_id(Action::discard(i), config));
  for (int i = 0; i < held; ++i) ids.push_back(action_id(Action::play(i), config));
  if (obs.hint_tokens > 0) {
    for (int k = 1; k < config.num_players; ++k)
      for (int c = 0; c < config.colors; ++c)
        if (std::any_of(obs.others_hands[k - 1].begin(), obs.others_hands[k - 1].end(),
                        [&](const Card& card) { return card.color == c; }))
          ids.push_back(action_id(Action::hint_color(k, c), config));
    for (int k = 1; k < config.num_players; ++k)
      for (int r = 1; r <= config.ranks; ++r)
        if (std::any_of(obs.others_hands[k - 1].begin(), obs.others_hands[k - 1].end(),
                        [&](const Card& card) { return card.rank == r; }))
          ids.push_back(action_id(Action::hint_rank(k, r), config));
  }
  return ids;
}

Observation parse_observation(const std::string& text, const TextTemplate& tmpl) {
  if (tmpl.version != kTextTemplateVersion)
    throw VersionError("unknown text template version '" + tmpl.version + "'");
  const GameConfig& cfg = tmpl.config;
  LineScanner in(text);
  Observation obs;
  obs.num_players = cfg.num_players;

  {
    const int ln = in.line_no();
    const std::string line = in.take();
    auto rest = strip_prefix(line, "you are player ", ln);
    auto words = split(rest, ' ');
    if (words.empty()) throw ParseError("missing viewer index", ln);
    obs.viewer = parse_int(words[0], ln, "viewer");
    if (obs.viewer < 0 || obs.viewer >= cfg.num_players)
      throw ParseError("viewer index out of range", ln);
    std::string tail(rest.substr(words[0].size()));
    if (tail == " to move")
      obs.current_player = true;
    else if (tail == " waiting")
      obs.current_player = false;
    else
      throw ParseError("expected 'to move' or 'waiting'", ln);
  }
  {
    const int ln = in.line_no();
    const std::string line = in.take();
    obs.hint_tokens = parse_int(strip_prefix(line, "hint tokens: ", ln), ln, "hint tokens");
    if (obs.hint_tokens < 0 || obs.hint_tokens > cfg.max_hint_tokens)
      throw ParseError("hint tokens out of range", ln);
  }
  {
    const int ln = in.line_no();
    const std::string line = in.take();
    obs.life_tokens = parse_int(strip_prefix(line, "life tokens: ", ln), ln, "life tokens");
    if (obs.life_tokens < 0 || obs.life_tokens > cfg.max_life_tokens)
      throw ParseError("life tokens out of range", ln);
  }
  {
    const int ln = in.line_no();
    const std::string line = in.take();
    auto rest = strip_prefix(line, "fireworks:", ln);
    auto words = split(rest, ' ');
    // leading "" from the leading space
    if (words.size() != size_t(2 * cfg.colors) + 1)
      throw ParseError("fireworks line must list every color", ln);
    for (int c = 0; c < cfg.colors; ++c) {
      if (words[size_t(2 * c) + 1] != color_name(c))
        throw ParseError("fireworks colors out of order", ln);
      int h = parse_int(words[size_t(2 * c) + 2], ln, "firework height");
      if (h < 0 || h > cfg.ranks) throw ParseError("firework height out of range", ln);
      obs.fireworks.push_back(h);
    }
  }
  for (int k = 1; k < cfg.num_players; ++k) {
    const int ln = in.line_no();
    const std::string line = in.take();
    auto rest = strip_prefix(line, "player +" + std::to_string(k) + " hand: ", ln);
    auto cards = parse_card_list(rest, cfg, ln);
    if (int(cards.size()) > cfg.effective_hand_size())
      throw ParseError("hand larger than hand size", ln);
    obs.others_hands.push_back(std::move(cards));
  }
  while (!in.done() && in.peek().rfind("your card ", 0) == 0) {
    const int ln = in.line_no();
    const std::string line = in.take();
    auto rest = strip_prefix(line, "your card ", ln);
    auto words = split(rest, ' ');
    // <i>: color <x> rank <y> possible <initials> <digits>
    if (words.size() != 8 || words[1] != "color" || words[3] != "rank" || words[5] != "possible")
      throw ParseError("malformed knowledge line", ln);
    int index = parse_int(words[0].substr(0, words[0].size() - 1), ln, "card index");
    if (index != int(obs.own_knowledge.size()) || words[0].back() != ':')
      throw ParseError("knowledge lines out of order", ln);
    if (index >= cfg.effective_hand_size()) throw ParseError("own hand larger than hand size", ln);
    CardKnowledge kn;
    if (words[2] != "?") kn.hinted_color = color_from_name(words[2], cfg, ln);
    if (words[4] != "?") {
      int r = parse_int(words[4], ln, "hinted rank");
      if (r < 1 || r > cfg.ranks) throw ParseError("hinted rank out of range", ln);
      kn.hinted_rank = r;
    }
    for (char ch : words[6]) {
      size_t c = kColorInitials.find(ch);
      if (c == std::string_view::npos || int(c) >= cfg.colors)
        throw ParseError("bad color initial in possibility set", ln);
      kn.possible_colors |= 1u << c;
    }
    for (char ch : words[7]) {
      if (ch < '1' || ch > '0' + cfg.ranks)
        throw ParseError("bad rank digit in possibility set", ln);
      kn.possible_ranks |= 1u << (ch - '1');
    }
    if (kn.possible_colors == 0 || kn.possible_ranks == 0)
      throw ParseError("empty possibility set", ln);
    if (kn.hinted_color && kn.possible_colors != (1u << *kn.hinted_color))
      throw ParseError("hinted color contradicts possibility set", ln);
    if (kn.hinted_rank && kn.possible_ranks != (1u << (*kn.hinted_rank - 1)))
      throw ParseError("hinted rank contradicts possibility set", ln);
    obs.own_knowledge.push_back(kn);
  }
  {
    const int ln = in.line_no();
    const std::string line = in.take();
    obs.deck_size = parse_int(strip_prefix(line, "deck size: ", ln), ln, "deck size");
    if (obs.deck_size < 0 || obs.deck_size > cfg.deck_size())
      throw ParseError("deck size out of range", ln);
  }
  if (!in.done() && in.peek().rfind("discards: ", 0) == 0) {
    const int ln = in.line_no();
    const std::string line = in.take();
    auto rest = strip_prefix(line, "discards: ", ln);
    auto pile = parse_card_list(rest, cfg, ln);
    if (!std::is_sorted(pile.begin(), pile.end()))
      throw ParseError("discard pile not in canonical order", ln);
    obs.discard_pile = std::move(pile);
  }
  if (!in.done() && in.peek().rfind("last action: ", 0) == 0) {
    const int ln = in.line_no();
    std::string rest(strip_prefix(in.take(), "last action: ", ln));
    LastAction la;
    int offset = 0;
    if (rest.rfind("you ", 0) == 0) {
      rest = rest.substr(4);
    } else if (rest.rfind("player +", 0) == 0) {
      auto words = split(rest, ' ');
      offset = parse_int(words[1].substr(1), ln, "actor offset");
      if (offset < 1 || offset >= cfg.num_players) throw ParseError("actor offset out of range", ln);
      rest = rest.substr(words[0].size() + words[1].size() + 2);
    } else {
      throw ParseError("malformed last-action actor", ln);
    }
    la.actor = (obs.viewer + offset) % cfg.num_players;
    size_t cut;
    if ((cut = rest.find(" -> ")) != std::string::npos) {
      la.action = parse_action(rest.substr(0, cut), cfg);
      std::string tail = rest.substr(cut + 4);
      if (la.action.kind == ActionKind::Play) {
        if (tail.size() > 8 && tail.substr(tail.size() - 8) == " success") {
          la.outcome.success = true;
          tail = tail.substr(0, tail.size() - 8);
        } else if (tail.size() > 5 && tail.substr(tail.size() - 5) == " miss") {
          la.outcome.success = false;
          tail = tail.substr(0, tail.size() - 5);
        } else {
          throw ParseError("play outcome must end in 'success' or 'miss'", ln);
        }
      } else if (la.action.kind != ActionKind::Discard) {
        throw ParseError("revealed-card outcome on a hint", ln);
      }
      la.outcome.revealed = parse_card(tail, cfg, ln);
    } else if ((cut = rest.find(" touching ")) != std::string::npos) {
      la.action = parse_action(rest.substr(0, cut), cfg);
      if (la.action.kind != ActionKind::HintColor && la.action.kind != ActionKind::HintRank)
        throw ParseError("touch list on a non-hint action", ln);
      std::string tail = rest.substr(cut + 10);
      if (tail.size() > 4 && tail.substr(tail.size() - 4) == " new") {
        la.outcome.tightened = true;
        tail = tail.substr(0, tail.size() - 4);
      } else if (tail.size() > 6 && tail.substr(tail.size() - 6) == " known") {
        la.outcome.tightened = false;
        tail = tail.substr(0, tail.size() - 6);
      } else {
        throw ParseError("hint outcome must end in 'new' or 'known'", ln);
      }
      for (auto part : split(tail, ',')) {
        int idx = parse_int(part, ln, "touched index");
        if (idx < 0 || idx >= cfg.effective_hand_size())
          throw ParseError("touched index out of range", ln);
        la.outcome.touched.push_back(idx);
      }
      if (la.outcome.touched.empty()) throw ParseError("empty touch list", ln);
    } else {
      throw ParseError("malformed last-action outcome", ln);
    }
    obs.last_action = la;
  }
  if (!in.done()) throw ParseError("unexpected trailing content", in.line_no());

  obs.legal_action_ids = legal_ids_from_observation(obs, cfg);
  return obs;
}

}  // namespace hanalab
