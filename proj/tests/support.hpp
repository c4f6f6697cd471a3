#pragma once

#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "tmw/agents.hpp"
#include "tmw/game.hpp"
#include "tmw/machine_text.hpp"
#include "tmw/world_machine.hpp"
#include "tmw/worldspace.hpp"

namespace tmw::test {

inline const Alphabet& A() {
  static const Alphabet a = Alphabet::minimal();
  return a;
}

inline Letter L(const std::string& name) { return *A().find(name); }

inline Tuple T(std::size_t from, const std::string& read, std::size_t to, const std::string& write, char d = 'R') {
  return {state(from), L(read), state(to), L(write), d == 'L' ? Dir::Left : Dir::Right};
}

/// n states; rows not covered by `rules` go to (p0, dflt, R).
inline WorldMachine make_world(std::size_t n, std::vector<Tuple> rules, const std::string& dflt = "draw") {
  const auto& a = A();
  for (std::size_t s = 0; s < n; ++s)
    for (std::size_t l = 0; l < a.world_tape_size(); ++l) {
      bool have = false;
      for (const auto& r : rules) have |= r.from == state(s) && r.read == letter(l);
      if (!have) rules.push_back({state(s), letter(l), state(0), L(dflt), Dir::Right});
    }
  return WorldMachine::create(a, n, state(0), std::move(rules));
}

inline WorldMachine sample(const std::string& file) {
  return parse_world(read_file(std::string(TMW_SAMPLES) + "/" + file));
}

/// A world given directly by its behavior: the percept for every action
/// sequence of the current game. Missing entries answer draw. The history
/// restarts after every final percept, as if the world were reset.
class ScriptedWorld {
 public:
  using Table = std::map<std::vector<Letter>, Letter>;

  ScriptedWorld(Alphabet a, std::shared_ptr<const Table> t) : a_(std::move(a)), t_(std::move(t)) {}

  const Alphabet& alphabet() const { return a_; }

  WorldStep respond(Letter action, Rng&, const WorldLimits& = {}, bool force_final = false) {
    return step(action, force_final);
  }

  std::vector<WorldBranch<ScriptedWorld>> outcomes(Letter action, const WorldLimits& = {},
                                                   bool force_final = false) const {
    ScriptedWorld next = *this;
    auto s = next.step(action, force_final);
    return {{s.percept, Rational(1), std::move(next), false}};
  }

  void reset() { h_.clear(); }

  bool operator==(const ScriptedWorld& o) const { return t_ == o.t_ && h_ == o.h_; }

 private:
  WorldStep step(Letter action, bool force_final) {
    h_.push_back(action);
    auto it = t_->find(h_);
    Letter p = it == t_->end() ? a_.draw() : it->second;
    bool forced = false;
    if (force_final && !a_.is_final(p)) {
      p = a_.draw();
      forced = true;
    }
    if (a_.is_final(p)) h_.clear();
    return {p, false, forced};
  }

  Alphabet a_;
  std::shared_ptr<const Table> t_;
  std::vector<Letter> h_;
};

static_assert(WorldModel<ScriptedWorld>);

/// Every deterministic game behavior over `a` with at most `cap` big steps,
/// up to what the forced final step erases. For cap 2, |sigma| = 5 and
/// |omega| = 2 there are (3 + 2 * 3 * 3)^2 = 441.
inline std::vector<ScriptedWorld::Table> all_behaviors(const Alphabet& a, std::uint32_t cap) {
  std::vector<std::vector<Letter>> open;
  for (std::size_t i = 0; i < a.omega_size(); ++i) open.push_back({a.omega(i)});
  struct Item {
    ScriptedWorld::Table table;
    std::vector<std::vector<Letter>> open;
  };
  std::vector<Item> work{{{}, open}};
  std::vector<ScriptedWorld::Table> done;
  while (!work.empty()) {
    Item it = std::move(work.back());
    work.pop_back();
    if (it.open.empty()) {
      done.push_back(std::move(it.table));
      continue;
    }
    auto h = it.open.back();
    it.open.pop_back();
    const bool last = h.size() >= cap;
    for (std::size_t p = 0; p < a.sigma_size(); ++p) {
      const Letter pl = a.sigma(p);
      if (last && !a.is_final(pl)) continue;
      Item next = it;
      next.table[h] = pl;
      if (!a.is_final(pl))
        for (std::size_t i = 0; i < a.omega_size(); ++i) {
          auto g = h;
          g.push_back(a.omega(i));
          next.open.push_back(std::move(g));
        }
      work.push_back(std::move(next));
    }
  }
  return done;
}

/// Random valid world with n states over the minimal alphabet; roughly one
/// row in five is a group of two or three output tuples.
inline WorldMachine random_world(Rng& rng, std::size_t n) {
  const auto& a = A();
  std::vector<Tuple> t;
  for (std::size_t s = 0; s < n; ++s)
    for (std::size_t l = 0; l < a.world_tape_size(); ++l) {
      if (rng.below(5) == 0) {
        std::size_t k = 2 + rng.below(2);
        std::vector<std::size_t> letters{0, 1, 2, 3, 4};
        for (std::size_t i = 0; i < k; ++i) {
          std::swap(letters[i], letters[i + rng.below(letters.size() - i)]);
          t.push_back({state(s), letter(l), state(0), a.sigma(letters[i]), rng.below(2) ? Dir::Right : Dir::Left});
        }
      } else {
        std::size_t to = rng.below(n);
        Letter w = to == 0 ? a.sigma(rng.below(a.sigma_size())) : letter(rng.below(a.world_tape_size()));
        t.push_back({state(s), letter(l), state(to), w, rng.below(2) ? Dir::Right : Dir::Left});
      }
    }
  return WorldMachine::create(a, n, state(0), std::move(t));
}

inline TapeSignature sig(std::size_t letters, std::size_t outputs) {
  TapeSignature s{letters, std::vector<bool>(letters, false)};
  for (std::size_t i = 0; i < outputs; ++i) s.output_ok[i] = true;
  return s;
}

using TableOf = std::pair<std::size_t, std::vector<Tuple>>;

/// Generate and validate: every raw deterministic table, one (state, letter,
/// direction) per row, kept if the validator accepts it.
inline std::set<TableOf> raw_deterministic_oracle(const TapeSignature& s, std::size_t p) {
  std::set<TableOf> out;
  const std::size_t rows = p * s.letters, choices = 2 * p * s.letters;
  std::vector<std::size_t> pick(rows, 0);
  for (;;) {
    std::vector<Tuple> t;
    for (std::size_t r = 0; r < rows; ++r) {
      std::size_t c = pick[r];
      t.push_back({state(r / s.letters), letter(r % s.letters), state(c / (2 * s.letters)),
                   letter((c / 2) % s.letters), c % 2 ? Dir::Right : Dir::Left});
    }
    try {
      out.insert({p, validate_world_tuples(s, p, state(0), t)});
    } catch (const Error&) {
    }
    std::size_t r = 0;
    while (r < rows && ++pick[r] == choices) pick[r++] = 0;
    if (r == rows) break;
  }
  return out;
}

}  // namespace tmw::test
