#pragma once

#include <algorithm>
#include <cassert>
#include <concepts>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tmw/machine.hpp"
#include "tmw/rational.hpp"
#include "tmw/rng.hpp"
#include "tmw/tape.hpp"

namespace tmw {

/// Checks the world-machine rules over a bare tape signature and returns the
/// tuples in canonical order (from, read, to, write, dir). Groups of tuples
/// sharing (from, read) therefore come out sorted by output letter.
inline std::vector<Tuple> validate_world_tuples(const TapeSignature& sig, std::size_t n_states,
                                                State start, std::vector<Tuple> tuples) {
  if (n_states == 0 || index(start) >= n_states)
    throw Error(Errc::MissingStart, "start state is not declared");
  for (const auto& t : tuples) {
    if (index(t.from) >= n_states || index(t.to) >= n_states)
      throw Error(Errc::UnknownState, "tuple references an undeclared state");
    if (index(t.read) >= sig.letters || index(t.write) >= sig.letters)
      throw Error(Errc::BadLetter, "tuple uses a letter outside the tape alphabet");
    if (t.to == start && !sig.output_ok[index(t.write)])
      throw Error(Errc::NonSigmaOutput,
                  "output tuple from " + state_name(t.from) + " writes a non-percept letter");
  }
  std::sort(tuples.begin(), tuples.end());
  if (std::adjacent_find(tuples.begin(), tuples.end()) != tuples.end())
    throw Error(Errc::DuplicateTuple, "the same tuple is listed twice");

  std::size_t i = 0;
  for (std::size_t s = 0; s < n_states; ++s) {
    for (std::size_t l = 0; l < sig.letters; ++l) {
      std::size_t j = i;
      while (j < tuples.size() && tuples[j].from == state(s) && tuples[j].read == letter(l)) ++j;
      if (j == i)
        throw Error(Errc::NotTotal, "no tuple for (" + state_name(state(s)) + ", letter " +
                                        std::to_string(l) + ")");
      if (j - i > 1) {
        for (std::size_t k = i; k < j; ++k)
          if (tuples[k].to != start)
            throw Error(Errc::IllegalNondeterminism,
                        "non-output tuple shares (" + state_name(state(s)) + ", letter " +
                            std::to_string(l) + ") with another tuple");
        for (std::size_t k = i + 1; k < j; ++k)
          if (tuples[k].write == tuples[k - 1].write)
            throw Error(Errc::DirectionOnlyDuplicate,
                        "two tuples for (" + state_name(state(s)) + ", letter " + std::to_string(l) +
                            ") differ only in direction");
      }
      i = j;
    }
  }
  return tuples;
}

/// A world machine: a relation over 5-tuples, total on (state, letter), and
/// nondeterministic only on output tuples (those returning to the start
/// state). Each alternative in a group is chosen with equal probability.
class WorldMachine {
 public:
  static WorldMachine create(const Alphabet& alphabet, std::size_t n_states, State start,
                             std::vector<Tuple> tuples) {
    if (alphabet.service_size() != 0)
      throw Error(Errc::BadAlphabet, "world machines have no service letters");
    WorldMachine m;
    m.alphabet_ = alphabet;
    m.n_states_ = n_states;
    m.start_ = start;
    m.tuples_ = validate_world_tuples(alphabet.world_signature(), n_states, start, std::move(tuples));
    m.index_rows();
    return m;
  }

  static WorldMachine from_description(const MachineDescription& d) {
    if (d.alphabet.service_size() != 0)
      throw Error(Errc::BadAlphabet, "world machines have no service letters");
    State start{};
    auto tuples = detail::resolve_rules(d, d.alphabet.world_tape_size(), start);
    return create(d.alphabet, d.n_states, start, std::move(tuples));
  }

  const Alphabet& alphabet() const { return alphabet_; }
  std::size_t n_states() const { return n_states_; }
  State start() const { return start_; }
  const std::vector<Tuple>& tuples() const { return tuples_; }

  /// All tuples applicable at (s, l), sorted by output letter.
  std::span<const Tuple> row(State s, Letter l) const {
    const auto& r = rows_[index(s) * alphabet_.world_tape_size() + index(l)];
    return {tuples_.data() + r.first, r.second - r.first};
  }

  /// Number of tuples minus number of rows: tuples that would have to be
  /// removed to make the machine deterministic.
  std::size_t indefiniteness() const { return tuples_.size() - rows_.size(); }

  std::size_t size() const { return n_states_ + indefiniteness(); }

  bool deterministic() const { return indefiniteness() == 0; }

  bool operator==(const WorldMachine& o) const {
    return n_states_ == o.n_states_ && start_ == o.start_ && tuples_ == o.tuples_ &&
           alphabet_ == o.alphabet_;
  }

 private:
  void index_rows() {
    rows_.assign(n_states_ * alphabet_.world_tape_size(), {0, 0});
    for (std::size_t i = 0; i < tuples_.size();) {
      std::size_t j = i;
      while (j < tuples_.size() && tuples_[j].from == tuples_[i].from && tuples_[j].read == tuples_[i].read)
        ++j;
      rows_[index(tuples_[i].from) * alphabet_.world_tape_size() + index(tuples_[i].read)] = {i, j};
      i = j;
    }
  }

  Alphabet alphabet_;
  std::size_t n_states_ = 0;
  State start_{};
  std::vector<Tuple> tuples_;
  std::vector<std::pair<std::size_t, std::size_t>> rows_;
};

/// Per-big-step limits applied to any world.
struct WorldLimits {
  std::uint64_t small_step_cap = 800;
  std::size_t branch_bound = 1024;
};

struct WorldStep {
  Letter percept{};
  bool small_step_cap_hit = false;
  bool forced_final = false;  // a non-final output was replaced by draw
};

template <class W>
struct WorldBranch {
  Letter percept{};
  Rational probability;
  W next;
  bool small_step_cap_hit = false;
};

/// What the game runtime and the tree builder need from a world.
///
/// `force_final` asks the world to complete the big step with a final letter:
/// a non-final output is replaced by draw (the game-length cap).
template <class W>
concept WorldModel = std::copyable<W> && requires(W w, const W cw, Letter a, Rng& rng,
                                                  const WorldLimits& lim, bool f) {
  { cw.alphabet() } -> std::convertible_to<const Alphabet&>;
  { w.respond(a, rng, lim, f) } -> std::same_as<WorldStep>;
  { cw.outcomes(a, lim, f) } -> std::same_as<std::vector<WorldBranch<W>>>;
  { cw == cw } -> std::convertible_to<bool>;
  w.reset();
};

/// A world machine in execution. The control state is the start state at
/// every big-step boundary; everything the world remembers is on the tape.
class WorldRun {
 public:
  WorldRun() = default;
  explicit WorldRun(std::shared_ptr<const WorldMachine> m)
      : m_(std::move(m)), tape_(m_->alphabet().blank()), state_(m_->start()) {}
  explicit WorldRun(WorldMachine m) : WorldRun(std::make_shared<const WorldMachine>(std::move(m))) {}

  const WorldMachine& machine() const { return *m_; }
  std::shared_ptr<const WorldMachine> machine_ptr() const { return m_; }
  const Alphabet& alphabet() const { return m_->alphabet(); }
  const Tape& tape() const { return tape_; }
  std::int64_t head() const { return head_; }
  State control() const { return state_; }
  std::uint64_t small_steps() const { return small_; }
  std::uint64_t big_steps_total() const { return big_; }

  /// One big step: the action is written under the head, then the machine
  /// runs until an output tuple fires. Group choices are uniform draws from
  /// `rng` over the canonical (output-letter) order.
  WorldStep respond(Letter action, Rng& rng, const WorldLimits& lim = {}, bool force_final = false) {
    begin(action);
    if (auto done = run_deterministic(lim, force_final)) return *done;
    auto r = current_row();
    return *apply(r[rng.below(r.size())], force_final);
  }

  /// Every percept this big step can produce, with exact probabilities.
  /// Entries are one per branch; percepts are distinct except when
  /// `force_final` maps several non-final letters to draw.
  std::vector<WorldBranch<WorldRun>> outcomes(Letter action, const WorldLimits& lim = {},
                                              bool force_final = false) const {
    WorldRun base = *this;
    base.begin(action);
    std::vector<WorldBranch<WorldRun>> out;
    if (auto done = base.run_deterministic(lim, force_final)) {
      out.push_back({done->percept, Rational(1), std::move(base), done->small_step_cap_hit});
      return out;
    }
    auto r = base.current_row();
    if (r.size() > lim.branch_bound)
      throw Error(Errc::BranchExplosion, std::to_string(r.size()) + " branches in one big step");
    const Rational p(1, static_cast<long>(r.size()));
    for (const auto& t : r) {
      WorldRun next = base;
      auto step = *next.apply(t, force_final);
      out.push_back({step.percept, p, std::move(next), step.small_step_cap_hit});
    }
    return out;
  }

  /// Back to the start configuration: blank tape, head at 0.
  void reset() {
    tape_.clear();
    head_ = 0;
    state_ = m_->start();
    small_ = 0;
  }

  bool operator==(const WorldRun& o) const {
    return head_ == o.head_ && state_ == o.state_ && (m_ == o.m_ || *m_ == *o.m_) && tape_ == o.tape_;
  }

  std::size_t hash() const {
    return tape_.hash() ^ (static_cast<std::size_t>(head_) * 0x9e3779b97f4a7c15ULL) ^ index(state_);
  }

 private:
  std::span<const Tuple> current_row() const { return m_->row(state_, tape_.read(head_)); }

  void begin(Letter action) {
    assert(state_ == m_->start());
    tape_.write(head_, action);
    small_ = 0;
  }

  std::optional<WorldStep> run_deterministic(const WorldLimits& lim, bool force_final) {
    for (;;) {
      auto r = current_row();
      if (small_ >= lim.small_step_cap) {
        // The step past the cap behaves as an output tuple writing draw. On a
        // group row the first tuple's direction is used; no choice is drawn.
        const auto& t = r.front();
        ++small_;
        const Letter draw = m_->alphabet().draw();
        tape_.write(head_, draw);
        head_ += static_cast<std::int64_t>(t.dir);
        state_ = m_->start();
        ++big_;
        return WorldStep{draw, true};
      }
      if (r.size() > 1) return std::nullopt;
      if (auto done = apply(r.front(), force_final)) return done;
    }
  }

  std::optional<WorldStep> apply(const Tuple& t, bool force_final) {
    ++small_;
    Letter out = t.write;
    const bool output = t.to == m_->start();
    const bool forced = output && force_final && !m_->alphabet().is_final(out);
    if (forced) out = m_->alphabet().draw();
    tape_.write(head_, out);
    head_ += static_cast<std::int64_t>(t.dir);
    state_ = t.to;
    if (!output) return std::nullopt;
    ++big_;
    return WorldStep{out, false, forced};
  }

  std::shared_ptr<const WorldMachine> m_;
  Tape tape_;
  std::int64_t head_ = 0;
  State state_{};
  std::uint64_t small_ = 0;
  std::uint64_t big_ = 0;
};

static_assert(WorldModel<WorldRun>);

}  // namespace tmw
