#pragma once

// Life transcript format:
//
//   tmw-life 1
//   seed 42
//   caps game=1000 world=800 life=100 agent=100000 reset=0
//   world 1f0e...
//   alphabet sigma=victory,loss,draw,o1,o2;omega=a,b;blank=_
//   game 1 victory 2 final_letter
//   a o1
//   b victory
//   end
//   ...
//
// A game block may carry an `error <text>` line before `end`.

#include <sstream>
#include <string>

#include "tmw/alphabet.hpp"
#include "tmw/game.hpp"

namespace tmw {

inline std::string serialize_life(const LifeRecord& life, const Alphabet& a) {
  std::ostringstream o;
  const Caps& c = life.caps;
  o << "tmw-life 1\n";
  o << "seed " << life.seed << '\n';
  o << "caps game=" << c.game_big_step_cap << " world=" << c.world_small_step_cap << " life=" << c.life_games
    << " agent=" << c.agent_small_step_cap << " reset=" << (c.reset_world_each_game ? 1 : 0) << '\n';
  o << "world " << (life.world_id.empty() ? "-" : life.world_id) << '\n';
  o << "alphabet " << a.describe() << '\n';
  for (std::size_t i = 0; i < life.games.size(); ++i) {
    const auto& g = life.games[i];
    o << "game " << i + 1 << ' ' << to_string(g.outcome) << ' ' << g.big_steps << ' ' << to_string(g.termination)
      << '\n';
    for (const auto& m : g.moves) o << a.name(m.action) << ' ' << a.name(m.percept) << '\n';
    if (!g.error.empty()) o << "error " << g.error << '\n';
    o << "end\n";
  }
  return o.str();
}

namespace detail {

inline Outcome parse_outcome(const std::string& s) {
  if (s == "victory") return Outcome::Victory;
  if (s == "loss") return Outcome::Loss;
  if (s == "draw") return Outcome::Draw;
  throw Error(Errc::ParseError, "bad outcome '" + s + "'");
}

inline Termination parse_termination(const std::string& s) {
  for (auto t : {Termination::FinalLetter, Termination::BigStepCap, Termination::WorldSmallStepCap,
                 Termination::AgentError})
    if (to_string(t) == s) return t;
  throw Error(Errc::ParseError, "bad termination '" + s + "'");
}

}  // namespace detail

/// Inverse of serialize_life. Returns the record and its alphabet.
inline std::pair<LifeRecord, Alphabet> parse_life(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int no = 0;
  auto next = [&]() -> std::string& {
    if (!std::getline(in, line)) throw Error(Errc::ParseError, "unexpected end of transcript");
    ++no;
    return line;
  };
  auto fail = [&](const std::string& msg) {
    return Error(Errc::ParseError, "transcript line " + std::to_string(no) + ": " + msg);
  };
  auto field = [&](const std::string& key) {
    const auto& l = next();
    if (l.rfind(key + " ", 0) != 0) throw fail("expected '" + key + "'");
    return l.substr(key.size() + 1);
  };

  LifeRecord life;
  if (next() != "tmw-life 1") throw fail("not a version 1 transcript");
  try {
    life.seed = std::stoull(field("seed"));
    std::istringstream caps(field("caps"));
    std::string kv;
    while (caps >> kv) {
      auto eq = kv.find('=');
      if (eq == std::string::npos) throw fail("bad caps entry '" + kv + "'");
      auto k = kv.substr(0, eq);
      auto v = std::stoull(kv.substr(eq + 1));
      if (k == "game") life.caps.game_big_step_cap = static_cast<std::uint32_t>(v);
      else if (k == "world") life.caps.world_small_step_cap = v;
      else if (k == "life") life.caps.life_games = static_cast<std::uint32_t>(v);
      else if (k == "agent") life.caps.agent_small_step_cap = v;
      else if (k == "reset") life.caps.reset_world_each_game = v != 0;
      else throw fail("unknown cap '" + k + "'");
    }
  } catch (const std::logic_error&) {
    throw fail("bad number");
  }
  life.world_id = field("world");
  if (life.world_id == "-") life.world_id.clear();
  Alphabet a = Alphabet::parse(field("alphabet"));

  auto letter_named = [&](const std::string& s) {
    auto l = a.find(s);
    if (!l) throw fail("unknown letter '" + s + "'");
    return *l;
  };

  while (std::getline(in, line)) {
    ++no;
    if (line.empty()) continue;
    std::istringstream head(line);
    std::string tag, outcome, term;
    std::size_t idx = 0;
    GameRecord g;
    if (!(head >> tag >> idx >> outcome >> g.big_steps >> term) || tag != "game") throw fail("expected a game header");
    g.outcome = detail::parse_outcome(outcome);
    g.termination = detail::parse_termination(term);
    for (;;) {
      const auto& l = next();
      if (l == "end") break;
      if (l.rfind("error ", 0) == 0) {
        g.error = l.substr(6);
        continue;
      }
      std::istringstream mv(l);
      std::string x, y;
      if (!(mv >> x >> y)) throw fail("expected 'action percept'");
      g.moves.push_back({letter_named(x), letter_named(y)});
    }
    life.counts.add(g.outcome);
    life.games.push_back(std::move(g));
  }
  return {std::move(life), std::move(a)};
}

}  // namespace tmw
