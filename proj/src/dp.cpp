#include "ssp/dp.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "ssp/properness.hpp"

namespace ssp {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// TJ together with the residual statistics of J, from a single backup.
struct Backup {
  ValueFunction value;
  ResidualStats stats;
};

ResidualStats stats_of(const ValueFunction& J, const std::vector<double>& TJ) {
  ResidualStats s;
  for (StateIndex i = 0; i < TJ.size(); ++i) {
    const double d = TJ[i] - J[i];
    s.c_under = std::min(s.c_under, d);
    s.c_bar = std::max(s.c_bar, d);
  }
  s.residual = std::max(-s.c_under, s.c_bar);
  return s;
}

std::vector<double> backup_values(const SspProblem& problem,
                                  const ValueFunction& J) {
  const StateIndex t = problem.terminal();
  std::vector<double> out(problem.num_states(), 0.0);
  for (StateIndex i = 0; i < problem.num_states(); ++i) {
    if (i == t) continue;
    double best = std::numeric_limits<double>::infinity();
    for (ActionIndex u = 0; u < problem.num_actions(); ++u) {
      best = std::min(best, action_value(problem, J, i, u));
    }
    out[i] = best;
  }
  return out;
}

Backup backup_with_stats(const SspProblem& problem, const ValueFunction& J) {
  auto TJ = backup_values(problem, J);
  const auto stats = stats_of(J, TJ);
  return {ValueFunction(std::move(TJ), problem.terminal()), stats};
}

double stochastic_value(const SspProblem& problem, const StochasticPolicy& policy,
                        const ValueFunction& J, StateIndex i) {
  double total = 0.0;
  for (ActionIndex u = 0; u < problem.num_actions(); ++u) {
    const double w = policy.weight(i, u);
    if (w != 0.0) total += w * action_value(problem, J, i, u);
  }
  return total;
}

// Mixture transition rows and expected costs of a stochastic policy.
struct Chain {
  std::vector<std::vector<double>> prob;
  std::vector<double> cost;
};

Chain policy_chain(const SspProblem& problem, const StochasticPolicy& policy) {
  const std::size_t n = problem.num_states();
  Chain chain{std::vector<std::vector<double>>(n, std::vector<double>(n, 0.0)),
              std::vector<double>(n, 0.0)};
  for (StateIndex i = 0; i < n; ++i) {
    for (ActionIndex u = 0; u < problem.num_actions(); ++u) {
      const double w = policy.weight(i, u);
      if (w == 0.0) continue;
      const auto p = problem.probs(i, u);
      for (StateIndex j = 0; j < n; ++j) chain.prob[i][j] += w * p[j];
      chain.cost[i] += w * expected_cost(problem, i, u);
    }
  }
  return chain;
}

ValueFunction solve_chain(const SspProblem& problem, const StochasticPolicy& policy) {
  const std::size_t n = problem.num_states();
  const StateIndex t = problem.terminal();
  const Chain chain = policy_chain(problem, policy);

  std::vector<StateIndex> index;  // nonterminal states in order
  for (StateIndex i = 0; i < n; ++i) {
    if (i != t) index.push_back(i);
  }
  const auto m = static_cast<Eigen::Index>(index.size());
  if (m == 0) return ValueFunction::zeros(problem);

  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(m, m);
  Eigen::VectorXd b(m);
  for (Eigen::Index r = 0; r < m; ++r) {
    b(r) = chain.cost[index[r]];
    for (Eigen::Index c = 0; c < m; ++c) A(r, c) -= chain.prob[index[r]][index[c]];
  }
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
  Eigen::VectorXd x = lu.solve(b);

  auto assemble = [&](const Eigen::VectorXd& sol) {
    std::vector<double> values(n, 0.0);
    for (Eigen::Index r = 0; r < m; ++r) values[index[r]] = sol(r);
    return values;
  };
  auto fixed_point_gap = [&](const std::vector<double>& values) {
    const ValueFunction J(values, t);
    double gap = 0.0;
    for (StateIndex i = 0; i < n; ++i) {
      if (i == t) continue;
      gap = std::max(gap, std::abs(stochastic_value(problem, policy, J, i) - J[i]));
    }
    return gap;
  };

  constexpr int kMaxRefinements = 8;
  for (int pass = 0;; ++pass) {
    const auto values = assemble(x);
    const bool finite = std::all_of(values.begin(), values.end(),
                                    [](double v) { return std::isfinite(v); });
    if (!finite) throw SingularSystemError("policy evaluation produced nonfinite values");
    const double gap = fixed_point_gap(values);
    if (gap <= kEvaluationResidualTolerance) return ValueFunction(values, t);
    if (pass == kMaxRefinements) {
      std::ostringstream msg;
      msg << "policy evaluation residual " << gap << " above tolerance after refinement";
      throw SingularSystemError(msg.str());
    }
    const Eigen::VectorXd r = b - A * x;
    x += lu.solve(r);
  }
}

void require_proper(const SspProblem& problem, const Policy& policy) {
  const auto report = is_proper(problem, policy);
  if (report.proper) return;
  std::ostringstream msg;
  msg << "policy is improper: terminal unreachable from state(s)";
  for (StateIndex i : report.unreachable_states) msg << ' ' << i;
  throw ImproperPolicyError(msg.str(), report.unreachable_states);
}

}  // namespace

double action_value(const SspProblem& problem, const ValueFunction& J,
                    StateIndex i, ActionIndex u) {
  const auto p = problem.probs(i, u);
  const auto g = problem.costs(i, u);
  double total = 0.0;
  for (StateIndex j = 0; j < problem.num_states(); ++j) {
    if (p[j] != 0.0) total += p[j] * (g[j] + J[j]);
  }
  return total;
}

ValueFunction bellman_backup(const SspProblem& problem, const ValueFunction& J) {
  check_value_function(problem, J);
  return ValueFunction(backup_values(problem, J), problem.terminal());
}

ValueFunction policy_backup(const SspProblem& problem,
                            const DeterministicPolicy& policy,
                            const ValueFunction& J) {
  check_value_function(problem, J);
  check_policy(problem, policy);
  std::vector<double> out(problem.num_states(), 0.0);
  for (StateIndex i = 0; i < problem.num_states(); ++i) {
    if (i != problem.terminal()) out[i] = action_value(problem, J, i, policy[i]);
  }
  return ValueFunction(std::move(out), problem.terminal());
}

ValueFunction stochastic_policy_backup(const SspProblem& problem,
                                       const StochasticPolicy& policy,
                                       const ValueFunction& J) {
  check_value_function(problem, J);
  check_policy(problem, policy);
  std::vector<double> out(problem.num_states(), 0.0);
  for (StateIndex i = 0; i < problem.num_states(); ++i) {
    if (i != problem.terminal()) out[i] = stochastic_value(problem, policy, J, i);
  }
  return ValueFunction(std::move(out), problem.terminal());
}

DeterministicPolicy greedy_policy(const SspProblem& problem,
                                  const ValueFunction& J) {
  check_value_function(problem, J);
  std::vector<ActionIndex> actions(problem.num_states(), 0);
  for (StateIndex i = 0; i < problem.num_states(); ++i) {
    if (i == problem.terminal()) continue;
    double best = std::numeric_limits<double>::infinity();
    for (ActionIndex u = 0; u < problem.num_actions(); ++u) {
      const double q = action_value(problem, J, i, u);
      if (q < best) {
        best = q;
        actions[i] = u;
      }
    }
  }
  return DeterministicPolicy(std::move(actions));
}

ResidualStats bellman_residual(const SspProblem& problem, const ValueFunction& J) {
  check_value_function(problem, J);
  return stats_of(J, backup_values(problem, J));
}

bool is_uniformly_improvable(const SspProblem& problem, const ValueFunction& J,
                             double tolerance) {
  check_value_function(problem, J);
  const auto TJ = backup_values(problem, J);
  for (StateIndex i = 0; i < TJ.size(); ++i) {
    if (TJ[i] > J[i] + tolerance) return false;
  }
  return true;
}

void require_uniformly_improvable(const SspProblem& problem,
                                  const ValueFunction& J, double tolerance) {
  check_value_function(problem, J);
  const auto TJ = backup_values(problem, J);
  StateIndex worst = 0;
  double excess = 0.0;
  for (StateIndex i = 0; i < TJ.size(); ++i) {
    if (TJ[i] - J[i] > excess) {
      excess = TJ[i] - J[i];
      worst = i;
    }
  }
  if (excess > tolerance) {
    std::ostringstream msg;
    msg << "value function is not uniformly improvable: TJ exceeds J by "
        << excess << " at state " << worst;
    throw NotUniformlyImprovableError(msg.str(), worst, excess);
  }
}

ValueIterationResult value_iteration(const SspProblem& problem,
                                     ValueFunction initial, double epsilon,
                                     std::size_t max_iters) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  check_value_function(problem, initial);
  const auto start = Clock::now();

  ValueIterationResult result;
  auto next = backup_with_stats(problem, initial);
  result.trace.push_back({0, initial, next.stats, seconds_since(start)});
  result.value = std::move(initial);

  for (std::size_t k = 1; next.stats.residual >= epsilon; ++k) {
    if (k > max_iters) return result;
    result.value = std::move(next.value);
    next = backup_with_stats(problem, result.value);
    result.trace.push_back({k, result.value, next.stats, seconds_since(start)});
  }
  result.converged = true;
  return result;
}

ValueFunction evaluate_policy(const SspProblem& problem,
                              const DeterministicPolicy& policy) {
  check_policy(problem, policy);
  require_proper(problem, Policy{policy});
  return solve_chain(problem,
                     StochasticPolicy::point_mass(policy, problem.num_actions()));
}

ValueFunction evaluate_policy(const SspProblem& problem,
                              const StochasticPolicy& policy) {
  check_policy(problem, policy);
  require_proper(problem, Policy{policy});
  return solve_chain(problem, policy);
}

ValueFunction evaluate_policy(const SspProblem& problem, const Policy& policy) {
  return std::visit([&](const auto& p) { return evaluate_policy(problem, p); },
                    policy);
}

double max_norm_distance(const ValueFunction& a, const ValueFunction& b) {
  if (a.size() != b.size()) throw std::invalid_argument("value functions differ in size");
  double d = 0.0;
  for (StateIndex i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

PolicyIterationResult policy_iteration(const SspProblem& problem,
                                       const Policy& initial,
                                       std::size_t max_iters) {
  const auto start = Clock::now();
  PolicyIterationResult result;
  result.value = evaluate_policy(problem, initial);
  result.trace.push_back({0, result.value, bellman_residual(problem, result.value),
                          seconds_since(start)});

  std::optional<DeterministicPolicy> previous;
  if (const auto* det = std::get_if<DeterministicPolicy>(&initial)) previous = *det;
  result.policy = previous.value_or(greedy_policy(problem, result.value));

  for (std::size_t k = 1; k <= max_iters; ++k) {
    auto improved = greedy_policy(problem, result.value);
    result.policies.push_back(improved);
    result.improvements = k;
    if (previous && improved == *previous) {
      result.trace.push_back({k, result.value, result.trace.back().stats,
                              seconds_since(start)});
      result.converged = true;
      return result;
    }
    auto value = evaluate_policy(problem, improved);
    const double change = max_norm_distance(value, result.value);
    result.trace.push_back({k, value, bellman_residual(problem, value),
                            seconds_since(start)});
    result.value = std::move(value);
    result.policy = improved;
    previous = std::move(improved);
    if (change < 1e-12) {
      result.converged = true;
      return result;
    }
  }
  return result;
}

}  // namespace ssp
