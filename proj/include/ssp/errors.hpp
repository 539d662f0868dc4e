#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ssp {

using StateIndex = std::size_t;
using ActionIndex = std::size_t;

// Root of every domain error the library raises. `kind()` is a stable
// machine-readable tag (the CLI prints it in its JSON error object).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept = 0;
};

class ParseError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "ParseError"; }
};

enum class ValidationFailure {
  kRowSumViolation,
  kTerminalNotAbsorbing,
  kTerminalCostNonzero,
  kNonfiniteCost,
  kProbabilityOutOfRange,
};

class ValidationError : public Error {
 public:
  ValidationError(ValidationFailure failure, std::string message,
                  StateIndex state = 0, ActionIndex action = 0,
                  double row_sum = 0.0)
      : Error(std::move(message)),
        failure_(failure),
        state_(state),
        action_(action),
        row_sum_(row_sum) {}

  const char* kind() const noexcept override;
  ValidationFailure failure() const noexcept { return failure_; }
  StateIndex state() const noexcept { return state_; }
  ActionIndex action() const noexcept { return action_; }
  double row_sum() const noexcept { return row_sum_; }

 private:
  ValidationFailure failure_;
  StateIndex state_;
  ActionIndex action_;
  double row_sum_;
};

class ImproperPolicyError : public Error {
 public:
  ImproperPolicyError(std::string message, std::vector<StateIndex> states)
      : Error(std::move(message)), states_(std::move(states)) {}
  const char* kind() const noexcept override { return "ImproperPolicy"; }
  // States from which the terminal is unreachable under the policy.
  const std::vector<StateIndex>& states() const noexcept { return states_; }

 private:
  std::vector<StateIndex> states_;
};

class SingularSystemError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "SingularSystem"; }
};

class NotUniformlyImprovableError : public Error {
 public:
  NotUniformlyImprovableError(std::string message, StateIndex state,
                              double excess)
      : Error(std::move(message)), state_(state), excess_(excess) {}
  const char* kind() const noexcept override {
    return "NotUniformlyImprovable";
  }
  // First state where TJ(i) > J(i) + tolerance, and by how much.
  StateIndex state() const noexcept { return state_; }
  double excess() const noexcept { return excess_; }

 private:
  StateIndex state_;
  double excess_;
};

struct TransitionRef {
  StateIndex from;
  ActionIndex action;
  StateIndex to;
  bool operator==(const TransitionRef&) const = default;
};

class NonpositiveCostError : public Error {
 public:
  NonpositiveCostError(std::string message,
                       std::vector<TransitionRef> offenders)
      : Error(std::move(message)), offenders_(std::move(offenders)) {}
  const char* kind() const noexcept override { return "NonpositiveCost"; }
  const std::vector<TransitionRef>& offenders() const noexcept {
    return offenders_;
  }

 private:
  std::vector<TransitionRef> offenders_;
};

class NotAllPoliciesProperError : public Error {
 public:
  NotAllPoliciesProperError(std::string message,
                            std::vector<StateIndex> witness_states,
                            std::vector<ActionIndex> witness_actions)
      : Error(std::move(message)),
        witness_states_(std::move(witness_states)),
        witness_actions_(std::move(witness_actions)) {}
  const char* kind() const noexcept override { return "NotAllPoliciesProper"; }
  const std::vector<StateIndex>& witness_states() const noexcept {
    return witness_states_;
  }
  const std::vector<ActionIndex>& witness_actions() const noexcept {
    return witness_actions_;
  }

 private:
  std::vector<StateIndex> witness_states_;
  std::vector<ActionIndex> witness_actions_;
};

class InfiniteStepsBoundError : public Error {
 public:
  InfiniteStepsBoundError(std::string message, StateIndex state)
      : Error(std::move(message)), state_(state) {}
  const char* kind() const noexcept override { return "InfiniteStepsBound"; }
  StateIndex state() const noexcept { return state_; }

 private:
  StateIndex state_;
};

class HorizonCapExceededError : public Error {
 public:
  HorizonCapExceededError(std::string message, std::size_t cap)
      : Error(std::move(message)), cap_(cap) {}
  const char* kind() const noexcept override { return "HorizonCapExceeded"; }
  std::size_t cap() const noexcept { return cap_; }

 private:
  std::size_t cap_;
};

class NoTerminalTransitionError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "NoTerminalTransition"; }
};

}  // namespace ssp
