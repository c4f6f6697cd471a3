#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace tmw {

enum class Errc : std::uint8_t {
  BadAlphabet,
  UnknownState,
  BadLetter,
  MissingStart,
  DuplicateRule,
  NotTotal,
  NonSigmaOutput,
  IllegalNondeterminism,
  DirectionOnlyDuplicate,
  DuplicateTuple,
  AgentHalted,
  SmallStepCapExceeded,
  NonActionOutput,
  BranchExplosion,
  EmptyLife,
  TreeTooLarge,
  StrategyMismatch,
  BudgetExceeded,
  ParseError,
  InvalidConfig,
};

constexpr std::string_view to_string(Errc e) {
  switch (e) {
    case Errc::BadAlphabet: return "BadAlphabet";
    case Errc::UnknownState: return "UnknownState";
    case Errc::BadLetter: return "BadLetter";
    case Errc::MissingStart: return "MissingStart";
    case Errc::DuplicateRule: return "DuplicateRule";
    case Errc::NotTotal: return "NotTotal";
    case Errc::NonSigmaOutput: return "NonSigmaOutput";
    case Errc::IllegalNondeterminism: return "IllegalNondeterminism";
    case Errc::DirectionOnlyDuplicate: return "DirectionOnlyDuplicate";
    case Errc::DuplicateTuple: return "DuplicateTuple";
    case Errc::AgentHalted: return "AgentHalted";
    case Errc::SmallStepCapExceeded: return "SmallStepCapExceeded";
    case Errc::NonActionOutput: return "NonActionOutput";
    case Errc::BranchExplosion: return "BranchExplosion";
    case Errc::EmptyLife: return "EmptyLife";
    case Errc::TreeTooLarge: return "TreeTooLarge";
    case Errc::StrategyMismatch: return "StrategyMismatch";
    case Errc::BudgetExceeded: return "BudgetExceeded";
    case Errc::ParseError: return "ParseError";
    case Errc::InvalidConfig: return "InvalidConfig";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

/// Raised by agent machines that hang or emit a non-action letter.
class AgentFailure : public Error {
 public:
  using Error::Error;
};

}  // namespace tmw
