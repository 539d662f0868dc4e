#include "ssp/problem.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>

namespace ssp {

namespace {

std::string row_label(StateIndex i, ActionIndex u) {
  std::ostringstream out;
  out << "(state " << i << ", action " << u << ")";
  return out.str();
}

}  // namespace

const char* ValidationError::kind() const noexcept {
  switch (failure_) {
    case ValidationFailure::kRowSumViolation:
      return "RowSumViolation";
    case ValidationFailure::kTerminalNotAbsorbing:
      return "TerminalNotAbsorbing";
    case ValidationFailure::kTerminalCostNonzero:
      return "TerminalCostNonzero";
    case ValidationFailure::kNonfiniteCost:
      return "NonfiniteCost";
    case ValidationFailure::kProbabilityOutOfRange:
      return "ProbabilityOutOfRange";
  }
  return "ValidationError";
}

SspProblem::SspProblem(std::size_t num_states, std::size_t num_actions,
                       StateIndex terminal, std::vector<double> prob,
                       std::vector<double> cost)
    : num_states_(num_states),
      num_actions_(num_actions),
      terminal_(terminal),
      prob_(std::move(prob)),
      cost_(std::move(cost)) {
  if (num_states_ == 0 || num_actions_ == 0) {
    throw std::invalid_argument("SspProblem needs at least one state and one action");
  }
  if (terminal_ >= num_states_) {
    throw std::invalid_argument("terminal state index out of range");
  }
  const std::size_t expected = num_states_ * num_actions_ * num_states_;
  if (prob_.size() != expected || cost_.size() != expected) {
    throw std::invalid_argument("transition tensors must have num_states * num_actions * num_states entries");
  }
}

ProblemBuilder::ProblemBuilder(std::size_t num_states, std::size_t num_actions,
                               StateIndex terminal)
    : num_states_(num_states),
      num_actions_(num_actions),
      terminal_(terminal),
      prob_(num_states * num_actions * num_states, 0.0),
      cost_(num_states * num_actions * num_states, 0.0) {
  if (num_states == 0 || num_actions == 0) {
    throw std::invalid_argument("problem needs at least one state and one action");
  }
  if (terminal >= num_states) {
    throw std::out_of_range("terminal " + std::to_string(terminal) + " outside " +
                            std::to_string(num_states) + " states");
  }
}

ProblemBuilder& ProblemBuilder::transition(StateIndex from, ActionIndex action,
                                           StateIndex to, double prob,
                                           double cost) {
  if (from >= num_states_ || to >= num_states_ || action >= num_actions_) {
    throw std::out_of_range("transition " + row_label(from, action) + " -> " +
                            std::to_string(to) + " out of range");
  }
  const std::size_t k = (from * num_actions_ + action) * num_states_ + to;
  if (prob_[k] != 0.0 && cost_[k] != cost) {
    throw std::invalid_argument("conflicting costs for repeated transition " +
                                row_label(from, action) + " -> " +
                                std::to_string(to));
  }
  prob_[k] += prob;
  cost_[k] = cost;
  return *this;
}

ProblemBuilder& ProblemBuilder::absorbing_terminal() {
  for (ActionIndex u = 0; u < num_actions_; ++u) {
    const std::size_t row = (terminal_ * num_actions_ + u) * num_states_;
    for (StateIndex j = 0; j < num_states_; ++j) {
      prob_[row + j] = 0.0;
      cost_[row + j] = 0.0;
    }
    prob_[row + terminal_] = 1.0;
  }
  return *this;
}

SspProblem ProblemBuilder::build() const {
  return SspProblem(num_states_, num_actions_, terminal_, prob_, cost_);
}

ValueFunction::ValueFunction(std::vector<double> values, StateIndex terminal)
    : values_(std::move(values)) {
  if (terminal >= values_.size()) {
    throw std::invalid_argument("value function has no entry for the terminal state");
  }
  if (values_[terminal] != 0.0) {
    throw std::invalid_argument("value function must be 0 at the terminal state");
  }
  for (double v : values_) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument("value function entries must be finite");
    }
  }
}

ValueFunction ValueFunction::zeros(const SspProblem& problem) {
  return ValueFunction(std::vector<double>(problem.num_states(), 0.0),
                       problem.terminal());
}

StochasticPolicy::StochasticPolicy(std::size_t num_states,
                                   std::size_t num_actions,
                                   std::vector<double> weights)
    : num_states_(num_states),
      num_actions_(num_actions),
      weights_(std::move(weights)) {
  if (weights_.size() != num_states_ * num_actions_) {
    throw std::invalid_argument("policy weights must have num_states * num_actions entries");
  }
  for (StateIndex i = 0; i < num_states_; ++i) {
    double total = 0.0;
    for (ActionIndex u = 0; u < num_actions_; ++u) {
      const double w = weights_[i * num_actions_ + u];
      if (!(w >= 0.0)) {
        throw std::invalid_argument("policy weights must be nonnegative");
      }
      total += w;
    }
    if (std::abs(total - 1.0) > kRowSumTolerance) {
      throw std::invalid_argument("policy weights of state " +
                                  std::to_string(i) + " do not sum to 1");
    }
  }
}

StochasticPolicy StochasticPolicy::point_mass(const DeterministicPolicy& policy,
                                              std::size_t num_actions) {
  std::vector<double> weights(policy.size() * num_actions, 0.0);
  for (StateIndex i = 0; i < policy.size(); ++i) {
    if (policy[i] >= num_actions) {
      throw std::invalid_argument("action index out of range");
    }
    weights[i * num_actions + policy[i]] = 1.0;
  }
  return StochasticPolicy(policy.size(), num_actions, std::move(weights));
}

void check_policy(const SspProblem& problem, const DeterministicPolicy& policy) {
  if (policy.size() != problem.num_states()) {
    throw std::invalid_argument("policy size does not match the number of states");
  }
  for (ActionIndex u : policy.actions()) {
    if (u >= problem.num_actions()) {
      throw std::invalid_argument("policy uses an action index out of range");
    }
  }
}

void check_policy(const SspProblem& problem, const StochasticPolicy& policy) {
  if (policy.num_states() != problem.num_states() ||
      policy.num_actions() != problem.num_actions()) {
    throw std::invalid_argument("policy shape does not match the problem");
  }
}

void check_policy(const SspProblem& problem, const Policy& policy) {
  std::visit([&](const auto& p) { check_policy(problem, p); }, policy);
}

void check_value_function(const SspProblem& problem, const ValueFunction& J) {
  if (J.size() != problem.num_states()) {
    throw std::invalid_argument("value function size does not match the number of states");
  }
  if (J[problem.terminal()] != 0.0) {
    throw std::invalid_argument("value function must be 0 at the terminal state");
  }
}

void validate(const SspProblem& problem) {
  const std::size_t n = problem.num_states();
  const StateIndex t = problem.terminal();
  for (StateIndex i = 0; i < n; ++i) {
    for (ActionIndex u = 0; u < problem.num_actions(); ++u) {
      const auto p = problem.probs(i, u);
      const auto g = problem.costs(i, u);
      double total = 0.0;
      for (StateIndex j = 0; j < n; ++j) {
        if (!(p[j] >= 0.0 && p[j] <= 1.0)) {
          throw ValidationError(ValidationFailure::kProbabilityOutOfRange,
                                "probability outside [0, 1] at " + row_label(i, u),
                                i, u, p[j]);
        }
        if (!std::isfinite(g[j])) {
          throw ValidationError(ValidationFailure::kNonfiniteCost,
                                "nonfinite cost at " + row_label(i, u), i, u);
        }
        total += p[j];
      }
      if (std::abs(total - 1.0) > kRowSumTolerance) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "probabilities of " << row_label(i, u) << " sum to " << total;
        throw ValidationError(ValidationFailure::kRowSumViolation, msg.str(),
                              i, u, total);
      }
    }
  }
  for (ActionIndex u = 0; u < problem.num_actions(); ++u) {
    if (std::abs(problem.prob(t, u, t) - 1.0) > kRowSumTolerance) {
      throw ValidationError(ValidationFailure::kTerminalNotAbsorbing,
                            "terminal state is not absorbing under action " +
                                std::to_string(u),
                            t, u);
    }
    if (problem.cost(t, u, t) != 0.0) {
      throw ValidationError(ValidationFailure::kTerminalCostNonzero,
                            "terminal self-transition has nonzero cost under action " +
                                std::to_string(u),
                            t, u);
    }
  }
}

double expected_cost(const SspProblem& problem, StateIndex i, ActionIndex u) {
  if (i >= problem.num_states() || u >= problem.num_actions()) {
    throw std::out_of_range("expected_cost: " + row_label(i, u) + " out of range");
  }
  const auto p = problem.probs(i, u);
  const auto g = problem.costs(i, u);
  double total = 0.0;
  for (StateIndex j = 0; j < problem.num_states(); ++j) {
    if (p[j] != 0.0) total += p[j] * g[j];
  }
  return total;
}

SspProblem from_discounted(const DiscountedMdp& mdp, double beta) {
  if (!(beta > 0.0 && beta < 1.0)) {
    throw std::invalid_argument("discount factor must lie in (0, 1)");
  }
  const std::size_t n = mdp.num_states;
  const std::size_t a = mdp.num_actions;
  if (mdp.prob.size() != n * a * n || mdp.cost.size() != n * a * n) {
    throw std::invalid_argument("discounted MDP tensors have the wrong size");
  }
  const StateIndex terminal = n;
  ProblemBuilder builder(n + 1, a, terminal);
  for (StateIndex i = 0; i < n; ++i) {
    for (ActionIndex u = 0; u < a; ++u) {
      for (StateIndex j = 0; j < n; ++j) {
        const std::size_t k = (i * a + u) * n + j;
        if (mdp.prob[k] != 0.0) {
          builder.transition(i, u, j, beta * mdp.prob[k], mdp.cost[k]);
        }
      }
      builder.transition(i, u, terminal, 1.0 - beta, 0.0);
    }
  }
  builder.absorbing_terminal();
  return builder.build();
}

SspProblem negate_costs(const SspProblem& problem) {
  std::vector<double> cost = problem.cost_tensor();
  for (double& c : cost) c = -c;
  return SspProblem(problem.num_states(), problem.num_actions(),
                    problem.terminal(), problem.prob_tensor(), std::move(cost));
}

std::vector<StateIndex> immediate_exit_states(const SspProblem& problem) {
  std::vector<StateIndex> out;
  const StateIndex t = problem.terminal();
  for (StateIndex i = 0; i < problem.num_states(); ++i) {
    if (i == t) continue;
    bool exits = true;
    for (ActionIndex u = 0; u < problem.num_actions() && exits; ++u) {
      const auto p = problem.probs(i, u);
      for (StateIndex j = 0; j < problem.num_states(); ++j) {
        if (j != t && p[j] != 0.0) {
          exits = false;
          break;
        }
      }
    }
    if (exits) out.push_back(i);
  }
  return out;
}

}  // namespace ssp
