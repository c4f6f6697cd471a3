#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tmw/alphabet.hpp"
#include "tmw/error.hpp"
#include "tmw/policy.hpp"
#include "tmw/rational.hpp"
#include "tmw/rng.hpp"
#include "tmw/world_machine.hpp"

namespace tmw {

/// Game and life limits. Defaults: 1000 big steps per game, 800 small steps
/// per world big step, 100 games per life, 100000 small steps per agent big
/// step.
struct Caps {
  std::uint32_t game_big_step_cap = 1000;
  std::uint64_t world_small_step_cap = 800;
  std::uint32_t life_games = 100;
  std::uint64_t agent_small_step_cap = 100'000;
  /// Clear the world tape after every game. Off by default: the world
  /// remembers earlier games through its tape.
  bool reset_world_each_game = false;

  void validate() const {
    if (game_big_step_cap == 0 || world_small_step_cap == 0 || agent_small_step_cap == 0)
      throw Error(Errc::InvalidConfig, "caps must be positive");
  }

  WorldLimits world_limits() const { return {world_small_step_cap, 1024}; }

  bool operator==(const Caps&) const = default;
};

enum class Termination : std::uint8_t { FinalLetter, BigStepCap, WorldSmallStepCap, AgentError };

constexpr std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::FinalLetter: return "final_letter";
    case Termination::BigStepCap: return "big_step_cap";
    case Termination::WorldSmallStepCap: return "world_small_step_cap";
    case Termination::AgentError: return "agent_error";
  }
  return "?";
}

struct Move {
  Letter action{};
  Letter percept{};
  bool operator==(const Move&) const = default;
};

struct GameRecord {
  std::vector<Move> moves;
  Outcome outcome = Outcome::Draw;
  std::uint32_t big_steps = 0;
  Termination termination = Termination::FinalLetter;
  std::string error;  // agent failure message, if any

  bool operator==(const GameRecord&) const = default;
};

struct OutcomeCounts {
  std::uint64_t n_victory = 0;
  std::uint64_t n_loss = 0;
  std::uint64_t n_draw = 0;
  std::uint64_t n_games = 0;

  void add(Outcome o) {
    switch (o) {
      case Outcome::Victory: ++n_victory; break;
      case Outcome::Loss: ++n_loss; break;
      case Outcome::Draw: ++n_draw; break;
    }
    ++n_games;
  }

  bool operator==(const OutcomeCounts&) const = default;
};

struct LifeRecord {
  std::vector<GameRecord> games;
  OutcomeCounts counts;
  std::uint64_t seed = 0;
  Caps caps;
  std::string world_id;

  bool operator==(const LifeRecord&) const = default;
};

/// (2 * victories + draws) / (2 * games).
inline Rational success(const OutcomeCounts& c) {
  if (c.n_games == 0) throw Error(Errc::EmptyLife, "success of an empty life is undefined");
  return Rational(BigInt(2 * c.n_victory + c.n_draw), BigInt(2 * c.n_games));
}

inline Rational payoff(Outcome o) {
  switch (o) {
    case Outcome::Victory: return Rational(1);
    case Outcome::Loss: return Rational(0);
    case Outcome::Draw: return Rational(1, 2);
  }
  return Rational(0);
}

/// Element k-1 is the success over the first k games.
inline std::vector<Rational> success_prefix_series(const LifeRecord& life) {
  if (life.games.empty()) throw Error(Errc::EmptyLife, "no games");
  std::vector<Rational> out;
  out.reserve(life.games.size());
  OutcomeCounts c;
  for (const auto& g : life.games) {
    c.add(g.outcome);
    out.push_back(success(c));
  }
  return out;
}

/// Finite stand-in for the average of lim inf and lim sup: the midpoint of
/// the min and max over the last `tail` fraction of the series.
inline Rational limit_estimate(const std::vector<Rational>& series, const Rational& tail = Rational(1, 2)) {
  if (series.empty()) throw Error(Errc::EmptyLife, "no games");
  if (tail <= 0 || tail > 1) throw Error(Errc::InvalidConfig, "tail fraction must be in (0, 1]");
  // ceil(tail * n), at least one element
  Rational want = tail * Rational(BigInt(series.size()));
  BigInt k = boost::multiprecision::numerator(want) / boost::multiprecision::denominator(want);
  if (Rational(k) < want) ++k;
  auto keep = std::max<std::size_t>(1, k.convert_to<std::size_t>());
  auto first = series.end() - static_cast<long>(std::min(keep, series.size()));
  auto [lo, hi] = std::minmax_element(first, series.end());
  return (*lo + *hi) / 2;
}

inline Rational limit_estimate(const LifeRecord& life, const Rational& tail = Rational(1, 2)) {
  return limit_estimate(success_prefix_series(life), tail);
}

/// Plays one game: act, respond, observe, until a final percept. The percept
/// of big step `game_big_step_cap` is forced final (non-final becomes draw)
/// and is delivered to the agent like any other percept.
///
/// An AgentFailure ends the game as a loss; the exception does not escape.
template <WorldModel W>
GameRecord play_game(Policy& agent, W& world, const Caps& caps, Rng& rng) {
  const Alphabet& a = world.alphabet();
  const WorldLimits lim = caps.world_limits();
  GameRecord g;
  for (std::uint32_t k = 1;; ++k) {
    Letter action;
    try {
      action = agent.act();
    } catch (const AgentFailure& e) {
      g.outcome = Outcome::Loss;
      g.termination = Termination::AgentError;
      g.error = e.what();
      return g;
    }
    if (!a.is_omega(action)) {
      g.outcome = Outcome::Loss;
      g.termination = Termination::AgentError;
      g.error = "policy returned a non-action letter";
      return g;
    }
    const bool at_cap = k >= caps.game_big_step_cap;
    const WorldStep step = world.respond(action, rng, lim, at_cap);
    agent.observe(step.percept);
    g.moves.push_back({action, step.percept});
    g.big_steps = k;
    if (auto o = a.outcome(step.percept)) {
      g.outcome = *o;
      if (step.small_step_cap_hit) g.termination = Termination::WorldSmallStepCap;
      else if (step.forced_final) g.termination = Termination::BigStepCap;
      else g.termination = Termination::FinalLetter;
      return g;
    }
  }
}

/// Plays caps.life_games games against one world instance. After an agent
/// failure every remaining game is forfeited without moves.
template <WorldModel W>
LifeRecord play_life(Policy& agent, W world, const Caps& caps, std::uint64_t seed) {
  caps.validate();
  LifeRecord life;
  life.seed = seed;
  life.caps = caps;
  Rng rng(seed);
  bool failed = false;
  for (std::uint32_t i = 0; i < caps.life_games; ++i) {
    GameRecord g;
    if (failed) {
      g.outcome = Outcome::Loss;
      g.termination = Termination::AgentError;
      g.error = "agent failed in an earlier game";
    } else {
      g = play_game(agent, world, caps, rng);
      failed = g.termination == Termination::AgentError;
      if (caps.reset_world_each_game) world.reset();
    }
    life.counts.add(g.outcome);
    life.games.push_back(std::move(g));
  }
  return life;
}

}  // namespace tmw
