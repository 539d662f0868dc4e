#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "ssp/dp.hpp"
#include "ssp/problem.hpp"

namespace ssp {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class StepsMethod { kPositiveCost, kAllProper, kGeneralLoose, kOverride };
std::string_view to_string(StepsMethod method);

// Per-state upper bounds N(i) on the expected number of transitions until
// termination. Entries may be +infinity. The terminal entry is 0.
struct StepsBound {
  std::vector<double> steps;  // as produced by `method`, before overrides
  StepsMethod method = StepsMethod::kPositiveCost;
  // States where every action terminates immediately; their N is 1.
  std::vector<StateIndex> overrides;
  // States whose computed N fell below 1 and was raised to 1.
  std::vector<StateIndex> clamped;
  // Cost floors used by the positive-cost procedure (a and b), when set.
  std::optional<double> terminal_cost_floor;
  std::optional<double> step_cost_floor;

  // `steps` with the overrides applied.
  std::vector<double> effective() const;
  // Largest effective N over nonterminal states.
  double max_effective(StateIndex terminal) const;
};

struct SandwichBounds {
  std::vector<double> lower;  // J(i) + c_under * N_opt(i)
  std::vector<double> upper;  // J(i) + c_bar * N_greedy(i)
};

// Lower and upper envelopes around J* and J_greedy from the signed residual
// extremes. `n_optimal` bounds expected steps under an optimal policy,
// `n_greedy` under the greedy policy of J. A zero residual extreme times an
// infinite N contributes 0; a nonzero one throws InfiniteStepsBoundError.
SandwichBounds sandwich_bounds(const SspProblem& problem, const ValueFunction& J,
                               std::span<const double> n_optimal,
                               std::span<const double> n_greedy);

// ||TJ - J|| * N(i). Requires TJ <= J (NotUniformlyImprovableError).
std::vector<double> per_state_bound(const SspProblem& problem,
                                    const ValueFunction& J,
                                    std::span<const double> steps);
std::vector<double> per_state_bound(const SspProblem& problem,
                                    const ValueFunction& J,
                                    const StepsBound& steps);

// ||TJ - J|| * max_i N(i) over nonterminal states. Requires TJ <= J.
double global_bound(const SspProblem& problem, const ValueFunction& J,
                    std::span<const double> steps);
double global_bound(const SspProblem& problem, const ValueFunction& J,
                    const StepsBound& steps);

enum class StepCostFloor {
  kMinTransition,  // b = min g(i,u,j) over nonterminal destinations
  kMinExpected,    // b' = min over (i,u) of the mean nonterminal step cost
};

// N(i) = (J(i) - a)/b + 1 for problems whose nonterminal transitions all
// have positive cost. Valid for every policy mu with J_mu <= J.
// Throws NonpositiveCostError or NotUniformlyImprovableError.
StepsBound steps_bound_positive_costs(
    const SspProblem& problem, const ValueFunction& J,
    StepCostFloor floor = StepCostFloor::kMinTransition);

// Expected-steps bound valid for every policy when all policies are proper:
// solves the companion problem with cost -1 on nonterminal transitions and 0
// into the terminal. Throws NotAllPoliciesProperError with the witness.
StepsBound steps_bound_all_proper(const SspProblem& problem);

enum class HorizonCriterion {
  kWithTerminalCost,  // stop once J_k(i) + a > J(i) outside T_k
  kPseudocode,        // stop once J_k(i) > J(i) outside T_k
};

struct HorizonOptions {
  HorizonCriterion criterion = HorizonCriterion::kWithTerminalCost;
  std::size_t max_stages = 1'000'000;
};

struct HorizonCertificate {
  // Any policy mu with J_mu <= J terminates within m stages with positive
  // probability from every state.
  std::size_t m = 0;
  // terminating_sets[k]: states from which every policy terminates within k
  // stages with positive probability (T_k). Nested, T_0 = {terminal}.
  std::vector<std::vector<StateIndex>> terminating_sets;
  // stage_values[k][i]: minimum k-stage cost among policies that avoid
  // termination for k stages (J_k). NaN for states in T_k.
  std::vector<std::vector<double>> stage_values;
  // a: minimum cost of any transition into the terminal.
  double terminal_cost_floor = 0.0;
};

// Finite-horizon avoidance recursion that certifies the stage m. Requires
// TJ <= J. The guarantee assumes the cost collected after the first k stages
// is at least a, which holds when nonterminal transition costs are
// nonnegative; with negative costs the returned m can be too small.
// TODO: a sound variant for mixed-sign costs needs a lower bound on J*. Throws HorizonCapExceededError when no m is found within
// options.max_stages (e.g. a zero-cost nonterminal cycle).
HorizonCertificate horizon_m_general(const SspProblem& problem,
                                     const ValueFunction& J,
                                     HorizonOptions options = {});

// N(i) = m / rho_m with rho_m = p_n^(m-1) * p_t, from the smallest nonzero
// probability into the terminal (p_t) and elsewhere (p_n).
StepsBound loose_general_bound(const SspProblem& problem,
                               const HorizonCertificate& certificate);

struct MonteCarloEstimate {
  double mean = 0.0;       // over rollouts that terminated
  double std_error = 0.0;  // sample standard deviation / sqrt(completed)
  double ci95 = 0.0;       // 1.96 * std_error
  std::size_t completed = 0;
  std::size_t capped = 0;  // rollouts still running after `cap` steps
};

// Steps-to-terminal statistics of `trials` rollouts from `start`. Trial k
// draws from a generator seeded by (seed, k), so results do not depend on
// how trials are scheduled.
MonteCarloEstimate monte_carlo_steps(const SspProblem& problem,
                                     const Policy& policy, StateIndex start,
                                     std::size_t trials, std::uint64_t seed,
                                     std::size_t cap);

enum class BoundsMethod { kAuto, kPositiveCost, kAllProper, kGeneral };
std::string_view to_string(BoundsMethod method);

// kAuto resolves to positive-cost when every nonterminal transition has
// positive cost, else all-proper when all policies are proper, else general.
BoundsMethod resolve_bounds_method(const SspProblem& problem);

struct BoundsReport {
  ResidualStats stats;
  StepsBound steps;
  std::vector<double> per_state;  // bound on |J*(i) - J(i)|
  double global = 0.0;            // bound on ||J* - J||
  bool vacuous = false;           // some bound is infinite
  BoundsMethod method = BoundsMethod::kAuto;
  // Positive-cost method only: the bound with the expected-step-cost floor.
  std::optional<StepsBound> expected_floor_steps;
  std::optional<HorizonCertificate> certificate;  // general method only
};

// Steps bound for J under the given method (kAuto is resolved first).
StepsBound steps_bound(const SspProblem& problem, const ValueFunction& J,
                       BoundsMethod method,
                       std::optional<HorizonCertificate>* certificate = nullptr);

BoundsReport bounds_report(const SspProblem& problem, const ValueFunction& J,
                           BoundsMethod method = BoundsMethod::kAuto);

// One summary row per trace record: the worst state value, m = max_i N(i)
// from that record's value function, the residual of the previous record,
// and error = m * residual (a bound on the previous record's distance to J*).
struct TraceRow {
  std::size_t iteration = 0;
  double worst_value = 0.0;
  double m = 0.0;
  std::optional<double> residual;
  std::optional<double> error;
};

// `reward_form` reports values negated (the worst value is then the
// smallest). The worst value excludes terminal and override states.
std::vector<TraceRow> summarize_trace(const SspProblem& problem,
                                      const IterationTrace& trace,
                                      BoundsMethod method, bool reward_form);

}  // namespace ssp
