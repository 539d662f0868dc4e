#pragma once

#include <cstddef>
#include <span>
#include <variant>
#include <vector>

#include "ssp/errors.hpp"

namespace ssp {

// Absolute tolerance for probability row sums and policy weight sums.
inline constexpr double kRowSumTolerance = 1e-12;

// A finite stochastic shortest path instance in cost-minimization form.
//
// Transitions are stored densely as p(i, u, j) and g(i, u, j) in
// state-major / action / successor order. Construction checks only shapes
// and index ranges; `validate` checks the model invariants, so malformed
// instances can be represented and reported on.
class SspProblem {
 public:
  SspProblem(std::size_t num_states, std::size_t num_actions,
             StateIndex terminal, std::vector<double> prob,
             std::vector<double> cost);

  std::size_t num_states() const noexcept { return num_states_; }
  std::size_t num_actions() const noexcept { return num_actions_; }
  StateIndex terminal() const noexcept { return terminal_; }

  double prob(StateIndex i, ActionIndex u, StateIndex j) const {
    return prob_[offset(i, u) + j];
  }
  double cost(StateIndex i, ActionIndex u, StateIndex j) const {
    return cost_[offset(i, u) + j];
  }
  // Successor distribution and costs of taking u in i.
  std::span<const double> probs(StateIndex i, ActionIndex u) const {
    return {prob_.data() + offset(i, u), num_states_};
  }
  std::span<const double> costs(StateIndex i, ActionIndex u) const {
    return {cost_.data() + offset(i, u), num_states_};
  }

  const std::vector<double>& prob_tensor() const noexcept { return prob_; }
  const std::vector<double>& cost_tensor() const noexcept { return cost_; }

  bool operator==(const SspProblem&) const = default;

 private:
  std::size_t offset(StateIndex i, ActionIndex u) const noexcept {
    return (i * num_actions_ + u) * num_states_;
  }

  std::size_t num_states_;
  std::size_t num_actions_;
  StateIndex terminal_;
  std::vector<double> prob_;
  std::vector<double> cost_;
};

// Incremental construction of an SspProblem. Every entry starts at
// probability 0 and cost 0.
class ProblemBuilder {
 public:
  ProblemBuilder(std::size_t num_states, std::size_t num_actions,
                 StateIndex terminal);

  // Adds probability mass to (from, action, to). Repeated calls for the same
  // triple accumulate probability and must agree on the cost.
  ProblemBuilder& transition(StateIndex from, ActionIndex action,
                             StateIndex to, double prob, double cost);

  // Makes the terminal state absorbing at zero cost under every action.
  ProblemBuilder& absorbing_terminal();

  SspProblem build() const;

 private:
  std::size_t num_states_;
  std::size_t num_actions_;
  StateIndex terminal_;
  std::vector<double> prob_;
  std::vector<double> cost_;
};

// Cost-to-go per state. The terminal entry is exactly zero and every entry is
// finite.
class ValueFunction {
 public:
  ValueFunction() = default;
  ValueFunction(std::vector<double> values, StateIndex terminal);

  static ValueFunction zeros(const SspProblem& problem);

  std::size_t size() const noexcept { return values_.size(); }
  double operator[](StateIndex i) const { return values_[i]; }
  std::span<const double> values() const noexcept { return values_; }
  const std::vector<double>& vector() const noexcept { return values_; }

  bool operator==(const ValueFunction&) const = default;

 private:
  std::vector<double> values_;
};

class DeterministicPolicy {
 public:
  DeterministicPolicy() = default;
  explicit DeterministicPolicy(std::vector<ActionIndex> actions)
      : actions_(std::move(actions)) {}

  std::size_t size() const noexcept { return actions_.size(); }
  ActionIndex operator[](StateIndex i) const { return actions_[i]; }
  std::span<const ActionIndex> actions() const noexcept { return actions_; }

  bool operator==(const DeterministicPolicy&) const = default;

 private:
  std::vector<ActionIndex> actions_;
};

// Per-state distribution over actions.
class StochasticPolicy {
 public:
  StochasticPolicy(std::size_t num_states, std::size_t num_actions,
                   std::vector<double> weights);

  static StochasticPolicy point_mass(const DeterministicPolicy& policy,
                                     std::size_t num_actions);

  std::size_t num_states() const noexcept { return num_states_; }
  std::size_t num_actions() const noexcept { return num_actions_; }
  double weight(StateIndex i, ActionIndex u) const {
    return weights_[i * num_actions_ + u];
  }
  std::span<const double> weights(StateIndex i) const {
    return {weights_.data() + i * num_actions_, num_actions_};
  }

  bool operator==(const StochasticPolicy&) const = default;

 private:
  std::size_t num_states_;
  std::size_t num_actions_;
  std::vector<double> weights_;
};

using Policy = std::variant<DeterministicPolicy, StochasticPolicy>;

// Throws std::invalid_argument when the policy does not fit the problem.
void check_policy(const SspProblem& problem, const DeterministicPolicy& policy);
void check_policy(const SspProblem& problem, const StochasticPolicy& policy);
void check_policy(const SspProblem& problem, const Policy& policy);
void check_value_function(const SspProblem& problem, const ValueFunction& J);

// Throws ValidationError on the first violated model invariant.
void validate(const SspProblem& problem);

// g(i, u) = sum_j p_ij(u) g(i, u, j). Throws std::out_of_range on bad indices.
double expected_cost(const SspProblem& problem, StateIndex i, ActionIndex u);

// A discounted MDP: dense p(i, u, j) and g(i, u, j), no terminal state.
struct DiscountedMdp {
  std::size_t num_states;
  std::size_t num_actions;
  std::vector<double> prob;
  std::vector<double> cost;
};

// Reduces a discounted MDP to an SSP by appending a terminal state (index
// num_states) reached with probability 1 - beta, at zero cost, from every
// state-action pair; the original probabilities are scaled by beta. SSP
// values equal beta times the discounted values, so optimal policies agree.
// Throws std::invalid_argument unless 0 < beta < 1.
SspProblem from_discounted(const DiscountedMdp& mdp, double beta);

// Same instance with every transition cost negated (reward <-> cost).
SspProblem negate_costs(const SspProblem& problem);

// Nonterminal states where every action moves to the terminal with
// probability 1. Their expected number of steps to termination is exactly 1.
std::vector<StateIndex> immediate_exit_states(const SspProblem& problem);

}  // namespace ssp
