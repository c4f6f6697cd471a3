#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tmw/machine.hpp"
#include "tmw/tape.hpp"

namespace tmw {

/// A deterministic transducer: a partial function from (state, letter) to
/// (state, letter, direction) over sigma ∪ omega ∪ {blank} ∪ service.
class AgentMachine {
 public:
  struct Transition {
    State to{};
    Letter write{};
    Dir dir = Dir::Left;
  };

  static constexpr std::uint64_t default_small_step_cap = 100'000;

  static AgentMachine create(const Alphabet& alphabet, std::size_t n_states, State start,
                             const std::vector<Tuple>& rules,
                             std::optional<std::uint64_t> small_step_cap = std::nullopt) {
    if (n_states == 0 || index(start) >= n_states)
      throw Error(Errc::MissingStart, "start state is not declared");
    if (small_step_cap && *small_step_cap == 0)
      throw Error(Errc::InvalidConfig, "small-step cap must be positive");
    AgentMachine m;
    m.alphabet_ = alphabet;
    m.n_states_ = n_states;
    m.start_ = start;
    m.cap_ = small_step_cap;
    m.table_.assign(n_states * alphabet.tape_size(), std::nullopt);
    for (const auto& r : rules) {
      if (index(r.from) >= n_states || index(r.to) >= n_states)
        throw Error(Errc::UnknownState, "rule references an undeclared state");
      if (!alphabet.contains(r.read) || !alphabet.contains(r.write))
        throw Error(Errc::BadLetter, "rule uses a letter outside the tape alphabet");
      auto& slot = m.table_[index(r.from) * alphabet.tape_size() + index(r.read)];
      if (slot)
        throw Error(Errc::DuplicateRule, "two rules for (" + state_name(r.from) + ", " +
                                             alphabet.name(r.read) + ")");
      slot = Transition{r.to, r.write, r.dir};
    }
    return m;
  }

  static AgentMachine from_description(const MachineDescription& d) {
    State start{};
    auto rules = detail::resolve_rules(d, d.alphabet.tape_size(), start);
    try {
      return create(d.alphabet, d.n_states, start, rules, d.small_step_cap);
    } catch (const Error& e) {
      if (e.code() != Errc::DuplicateRule) throw;
      // Re-raise with the line of the second rule.
      for (std::size_t i = 0; i < rules.size(); ++i)
        for (std::size_t j = 0; j < i; ++j)
          if (rules[i].from == rules[j].from && rules[i].read == rules[j].read)
            throw Error(Errc::DuplicateRule, detail::where(d.rules[i].line) + e.what());
      throw;
    }
  }

  const Alphabet& alphabet() const { return alphabet_; }
  std::size_t n_states() const { return n_states_; }
  State start() const { return start_; }
  std::optional<std::uint64_t> small_step_cap() const { return cap_; }

  const Transition* lookup(State s, Letter l) const {
    const auto& slot = table_[index(s) * alphabet_.tape_size() + index(l)];
    return slot ? &*slot : nullptr;
  }

  std::vector<Tuple> rules() const {
    std::vector<Tuple> out;
    for (std::size_t s = 0; s < n_states_; ++s)
      for (std::size_t l = 0; l < alphabet_.tape_size(); ++l)
        if (auto t = lookup(state(s), letter(l))) out.push_back({state(s), letter(l), t->to, t->write, t->dir});
    return out;
  }

 private:
  Alphabet alphabet_;
  std::size_t n_states_ = 0;
  State start_{};
  std::optional<std::uint64_t> cap_;
  std::vector<std::optional<Transition>> table_;
};

/// An agent machine in execution. Big steps alternate emit() / absorb().
class AgentRun {
 public:
  explicit AgentRun(std::shared_ptr<const AgentMachine> m,
                    std::uint64_t default_cap = AgentMachine::default_small_step_cap)
      : m_(std::move(m)),
        tape_(m_->alphabet().blank()),
        state_(m_->start()),
        cap_(m_->small_step_cap().value_or(default_cap)) {}

  const Tape& tape() const { return tape_; }
  std::int64_t head() const { return head_; }
  State control() const { return state_; }
  std::uint64_t small_steps_this_big_step() const { return small_; }
  std::uint64_t big_steps_total() const { return big_; }

  /// Runs small steps until a transition re-enters the start state; the
  /// letter that transition wrote is the action.
  Letter emit() {
    small_ = 0;
    for (;;) {
      if (small_ >= cap_)
        throw AgentFailure(Errc::SmallStepCapExceeded,
                           "no big step within " + std::to_string(cap_) + " small steps");
      const auto* t = m_->lookup(state_, tape_.read(head_));
      if (t == nullptr)
        throw AgentFailure(Errc::AgentHalted, "no rule for (" + state_name(state_) + ", " +
                                                  m_->alphabet().name(tape_.read(head_)) + ")");
      ++small_;
      tape_.write(head_, t->write);
      head_ += static_cast<std::int64_t>(t->dir);
      state_ = t->to;
      if (state_ == m_->start()) {
        if (!m_->alphabet().is_omega(t->write))
          throw AgentFailure(Errc::NonActionOutput,
                             "emitted '" + m_->alphabet().name(t->write) + "', which is not an action");
        ++big_;
        return t->write;
      }
    }
  }

  /// The percept replaces whatever is under the head.
  void absorb(Letter percept) { tape_.write(head_, percept); }

 private:
  std::shared_ptr<const AgentMachine> m_;
  Tape tape_;
  std::int64_t head_ = 0;
  State state_{};
  std::uint64_t cap_;
  std::uint64_t small_ = 0;
  std::uint64_t big_ = 0;
};

}  // namespace tmw
