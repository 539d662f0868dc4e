#include "ssp/properness.hpp"

#include <algorithm>
#include <deque>
#include <limits>

namespace ssp {

namespace {

// Probability of moving i -> j in one step under the policy, as the
// policy-weighted mixture of the action rows.
double edge_probability(const SspProblem& problem, const Policy& policy,
                        StateIndex i, StateIndex j) {
  if (const auto* det = std::get_if<DeterministicPolicy>(&policy)) {
    return problem.prob(i, (*det)[i], j);
  }
  const auto& stoch = std::get<StochasticPolicy>(policy);
  double total = 0.0;
  for (ActionIndex u = 0; u < problem.num_actions(); ++u) {
    const double w = stoch.weight(i, u);
    if (w > 0.0) total += w * problem.prob(i, u, j);
  }
  return total;
}

}  // namespace

StochasticPolicy uniform_random_policy(const SspProblem& problem) {
  const std::size_t n = problem.num_states();
  const std::size_t a = problem.num_actions();
  return StochasticPolicy(
      n, a, std::vector<double>(n * a, 1.0 / static_cast<double>(a)));
}

ProperCheckReport is_proper(const SspProblem& problem, const Policy& policy) {
  check_policy(problem, policy);
  const std::size_t n = problem.num_states();
  const StateIndex t = problem.terminal();

  std::vector<std::vector<double>> edge(n, std::vector<double>(n, 0.0));
  for (StateIndex i = 0; i < n; ++i) {
    if (i == t) continue;
    for (StateIndex j = 0; j < n; ++j) edge[i][j] = edge_probability(problem, policy, i, j);
  }

  // Breadth-first search backwards from the terminal.
  constexpr std::size_t kUnreached = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> dist(n, kUnreached);
  std::deque<StateIndex> frontier{t};
  dist[t] = 0;
  while (!frontier.empty()) {
    const StateIndex j = frontier.front();
    frontier.pop_front();
    for (StateIndex i = 0; i < n; ++i) {
      if (dist[i] == kUnreached && edge[i][j] > 0.0) {
        dist[i] = dist[j] + 1;
        frontier.push_back(i);
      }
    }
  }

  ProperCheckReport report;
  for (StateIndex i = 0; i < n; ++i) {
    if (dist[i] == kUnreached) report.unreachable_states.push_back(i);
  }
  report.proper = report.unreachable_states.empty();
  if (!report.proper) return report;

  // Best single-path probability along shortest paths, layer by layer.
  std::size_t horizon = 1;
  for (StateIndex i = 0; i < n; ++i) horizon = std::max(horizon, dist[i]);
  std::vector<double> best(n, 0.0);
  best[t] = 1.0;
  for (std::size_t layer = 1; layer <= horizon; ++layer) {
    for (StateIndex i = 0; i < n; ++i) {
      if (dist[i] != layer) continue;
      for (StateIndex j = 0; j < n; ++j) {
        if (dist[j] + 1 == layer && edge[i][j] > 0.0) {
          best[i] = std::max(best[i], edge[i][j] * best[j]);
        }
      }
    }
  }
  double rho = 1.0;
  for (StateIndex i = 0; i < n; ++i) {
    if (i != t) rho = std::min(rho, best[i]);
  }
  report.m_stages = horizon;
  report.rho_m = rho;
  report.rho_method = "max-product shortest path";
  return report;
}

AllProperResult all_policies_proper(const SspProblem& problem) {
  const std::size_t n = problem.num_states();
  const StateIndex t = problem.terminal();
  std::vector<bool> in_set(n, true);
  in_set[t] = false;

  // An action keeps i inside the candidate set if all of its
  // positive-probability successors stay in the set.
  auto closing_action = [&](StateIndex i) -> std::optional<ActionIndex> {
    for (ActionIndex u = 0; u < problem.num_actions(); ++u) {
      const auto p = problem.probs(i, u);
      bool closed = true;
      for (StateIndex j = 0; j < n && closed; ++j) {
        if (p[j] > 0.0 && !in_set[j]) closed = false;
      }
      if (closed) return u;
    }
    return std::nullopt;
  };

  bool changed = true;
  while (changed) {
    changed = false;
    for (StateIndex i = 0; i < n; ++i) {
      if (in_set[i] && !closing_action(i)) {
        in_set[i] = false;
        changed = true;
      }
    }
  }

  AllProperResult result;
  for (StateIndex i = 0; i < n; ++i) {
    if (!in_set[i]) continue;
    result.witness_states.push_back(i);
    result.witness_actions.push_back(*closing_action(i));
  }
  result.all_proper = result.witness_states.empty();
  return result;
}

}  // namespace ssp
