#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tmw/alphabet.hpp"
#include "tmw/error.hpp"

namespace tmw {

enum class State : std::uint16_t {};

constexpr std::size_t index(State s) { return static_cast<std::size_t>(s); }
constexpr State state(std::size_t i) { return static_cast<State>(i); }

inline std::string state_name(State s) { return "p" + std::to_string(index(s)); }

/// One transition (q, a) -> (q', b, D).
struct Tuple {
  State from{};
  Letter read{};
  State to{};
  Letter write{};
  Dir dir = Dir::Left;

  friend auto operator<=>(const Tuple&, const Tuple&) = default;
};

/// A machine as written by a user, with symbolic names. Nothing is checked
/// until it is turned into an AgentMachine or a WorldMachine.
struct MachineDescription {
  struct Rule {
    std::string from, read, to, write;
    Dir dir = Dir::Left;
    int line = 0;
  };

  Alphabet alphabet;
  std::size_t n_states = 1;  // states are p0 .. p{n-1}
  std::string start = "p0";
  std::vector<Rule> rules;
  std::optional<std::uint64_t> small_step_cap;
};

namespace detail {

inline std::optional<State> parse_state(const std::string& name, std::size_t n_states) {
  if (name.size() < 2 || name[0] != 'p') return std::nullopt;
  std::size_t v = 0;
  for (std::size_t i = 1; i < name.size(); ++i) {
    if (name[i] < '0' || name[i] > '9') return std::nullopt;
    v = v * 10 + static_cast<std::size_t>(name[i] - '0');
    if (v > 60000) return std::nullopt;
  }
  if (name.size() > 2 && name[1] == '0') return std::nullopt;
  if (v >= n_states) return std::nullopt;
  return state(v);
}

inline std::string where(int line) { return line > 0 ? "line " + std::to_string(line) + ": " : ""; }

/// Resolves names against the description. `tape_letters` bounds the letters
/// a rule may use.
inline std::vector<Tuple> resolve_rules(const MachineDescription& d, std::size_t tape_letters,
                                        State& start) {
  if (d.n_states == 0) throw Error(Errc::MissingStart, "machine has no states");
  auto s0 = parse_state(d.start, d.n_states);
  if (!s0) throw Error(Errc::MissingStart, "start state '" + d.start + "' is not declared");
  start = *s0;

  std::vector<Tuple> out;
  out.reserve(d.rules.size());
  for (const auto& r : d.rules) {
    Tuple t;
    auto from = parse_state(r.from, d.n_states);
    auto to = parse_state(r.to, d.n_states);
    if (!from) throw Error(Errc::UnknownState, where(r.line) + "unknown state '" + r.from + "'");
    if (!to) throw Error(Errc::UnknownState, where(r.line) + "unknown state '" + r.to + "'");
    auto rd = d.alphabet.find(r.read);
    auto wr = d.alphabet.find(r.write);
    if (!rd || index(*rd) >= tape_letters)
      throw Error(Errc::BadLetter, where(r.line) + "letter '" + r.read + "' is not on the tape alphabet");
    if (!wr || index(*wr) >= tape_letters)
      throw Error(Errc::BadLetter, where(r.line) + "letter '" + r.write + "' is not on the tape alphabet");
    t.from = *from;
    t.read = *rd;
    t.to = *to;
    t.write = *wr;
    t.dir = r.dir;
    out.push_back(t);
  }
  return out;
}

}  // namespace detail

}  // namespace tmw
