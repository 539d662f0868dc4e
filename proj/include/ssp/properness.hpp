#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "ssp/problem.hpp"

namespace ssp {

// Weight 1/|U| on every action in every state.
StochasticPolicy uniform_random_policy(const SspProblem& problem);

struct ProperCheckReport {
  bool proper = false;
  // States from which the terminal cannot be reached under the policy.
  std::vector<StateIndex> unreachable_states;
  // Longest shortest positive-probability path to the terminal (>= 1).
  std::optional<std::size_t> m_stages;
  // Lower bound on the minimum probability of terminating within m_stages.
  std::optional<double> rho_m;
  // How rho_m was obtained.
  std::string rho_method;
};

// An edge i -> j exists iff some action with positive weight has
// p_ij(u) > 0 (exact comparison, no epsilon).
ProperCheckReport is_proper(const SspProblem& problem, const Policy& policy);

struct AllProperResult {
  bool all_proper = false;
  // Nonempty iff all_proper is false: a set of nonterminal states that some
  // action choice keeps closed forever, and that choice per witness state.
  std::vector<StateIndex> witness_states;
  std::vector<ActionIndex> witness_actions;
};

AllProperResult all_policies_proper(const SspProblem& problem);

}  // namespace ssp
