#pragma once

#include <cstddef>
#include <vector>

#include "ssp/problem.hpp"

namespace ssp {

// Signed extremes of TJ - J over all states (terminal included, where the
// difference is 0), so c_under <= 0 <= c_bar and
// residual = max(-c_under, c_bar) = ||TJ - J||.
struct ResidualStats {
  double residual = 0.0;
  double c_under = 0.0;
  double c_bar = 0.0;
};

struct IterationRecord {
  std::size_t iteration = 0;
  ValueFunction value;
  ResidualStats stats;  // residual of `value` itself
  double elapsed_seconds = 0.0;
};

using IterationTrace = std::vector<IterationRecord>;

// Q(i, u) = sum_j p_ij(u) (g(i, u, j) + J(j)), summed in successor order.
// Every backup in this module goes through this function, so the greedy
// policy's backup reproduces TJ bit for bit.
double action_value(const SspProblem& problem, const ValueFunction& J,
                    StateIndex i, ActionIndex u);

ValueFunction bellman_backup(const SspProblem& problem, const ValueFunction& J);
ValueFunction policy_backup(const SspProblem& problem,
                            const DeterministicPolicy& policy,
                            const ValueFunction& J);
ValueFunction stochastic_policy_backup(const SspProblem& problem,
                                       const StochasticPolicy& policy,
                                       const ValueFunction& J);

// Argmin of the one-step backup; ties go to the lowest action index.
DeterministicPolicy greedy_policy(const SspProblem& problem,
                                  const ValueFunction& J);

ResidualStats bellman_residual(const SspProblem& problem,
                               const ValueFunction& J);

inline constexpr double kUniformImprovabilityTolerance = 1e-9;

// True iff TJ(i) <= J(i) + tolerance for every state.
bool is_uniformly_improvable(
    const SspProblem& problem, const ValueFunction& J,
    double tolerance = kUniformImprovabilityTolerance);

// Throws NotUniformlyImprovableError naming the worst state otherwise.
void require_uniformly_improvable(
    const SspProblem& problem, const ValueFunction& J,
    double tolerance = kUniformImprovabilityTolerance);

struct ValueIterationResult {
  ValueFunction value;
  IterationTrace trace;
  // False when max_iters backups were spent before the residual dropped
  // below epsilon. The trace and the last value are still usable, and any
  // bound computed from them is still valid.
  bool converged = false;
};

// Applies T until ||TJ - J|| < epsilon or max_iters backups were made.
// trace[k] holds J_k = T^k J0 and its own residual.
ValueIterationResult value_iteration(const SspProblem& problem,
                                     ValueFunction initial, double epsilon,
                                     std::size_t max_iters);

inline constexpr double kEvaluationResidualTolerance = 1e-10;

// Solves (I - P_mu) J = g_mu over the nonterminal states by LU with partial
// pivoting followed by iterative refinement until ||T_mu J - J|| <= 1e-10.
// Throws ImproperPolicyError if the terminal is unreachable from some state
// under the policy, SingularSystemError if the refined solve still fails.
ValueFunction evaluate_policy(const SspProblem& problem,
                              const DeterministicPolicy& policy);
ValueFunction evaluate_policy(const SspProblem& problem,
                              const StochasticPolicy& policy);
ValueFunction evaluate_policy(const SspProblem& problem, const Policy& policy);

struct PolicyIterationResult {
  DeterministicPolicy policy;
  ValueFunction value;
  // trace[0] is the initial policy's evaluation; trace[k] the value of the
  // k-th improved policy. When the improved policy repeats, the final record
  // repeats the previous value.
  IterationTrace trace;
  std::vector<DeterministicPolicy> policies;  // improved policies, in order
  std::size_t improvements = 0;
  bool converged = false;
};

// Policy iteration from a proper initial policy. Stops when the improved
// policy equals the previous one, or when successive values differ by less
// than 1e-12 in max norm.
PolicyIterationResult policy_iteration(const SspProblem& problem,
                                       const Policy& initial,
                                       std::size_t max_iters);

double max_norm_distance(const ValueFunction& a, const ValueFunction& b);

}  // namespace ssp
