#pragma once

#include <memory>
#include <string>

#include "tmw/agent_machine.hpp"
#include "tmw/alphabet.hpp"

namespace tmw {

/// An agent as seen by the game runtime: it is asked for an action, then
/// told the percept. Final percepts (including forced draws) are the only
/// game-boundary signal.
class Policy {
 public:
  virtual ~Policy() = default;

  /// Next action; a letter of omega. May throw AgentFailure.
  virtual Letter act() = 0;

  virtual void observe(Letter percept) = 0;

  virtual std::string name() const = 0;
};

/// Runs an AgentMachine as a policy.
class MachinePolicy final : public Policy {
 public:
  explicit MachinePolicy(std::shared_ptr<const AgentMachine> m,
                         std::uint64_t default_cap = AgentMachine::default_small_step_cap)
      : run_(std::move(m), default_cap) {}

  Letter act() override { return run_.emit(); }
  void observe(Letter percept) override { run_.absorb(percept); }
  std::string name() const override { return "tm"; }

  const AgentRun& run() const { return run_; }

 private:
  AgentRun run_;
};

}  // namespace tmw
