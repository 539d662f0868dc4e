#include "ssp/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include "ssp/properness.hpp"

namespace ssp {

namespace {

// residual * N with the extended-real convention 0 * inf = 0.
double scaled(double residual, double steps) {
  if (residual == 0.0) return 0.0;
  return residual * steps;
}

std::optional<double> min_terminal_cost(const SspProblem& problem) {
  const StateIndex t = problem.terminal();
  std::optional<double> a;
  for (StateIndex i = 0; i < problem.num_states(); ++i) {
    if (i == t) continue;
    for (ActionIndex u = 0; u < problem.num_actions(); ++u) {
      if (problem.prob(i, u, t) > 0.0) {
        const double g = problem.cost(i, u, t);
        a = a ? std::min(*a, g) : g;
      }
    }
  }
  return a;
}

std::vector<bool> membership(std::size_t n, const std::vector<StateIndex>& states) {
  std::vector<bool> in(n, false);
  for (StateIndex i : states) in[i] = true;
  return in;
}

std::vector<StateIndex> members(const std::vector<bool>& in) {
  std::vector<StateIndex> out;
  for (StateIndex i = 0; i < in.size(); ++i) {
    if (in[i]) out.push_back(i);
  }
  return out;
}

}  // namespace

std::string_view to_string(StepsMethod method) {
  switch (method) {
    case StepsMethod::kPositiveCost:
      return "positive-cost";
    case StepsMethod::kAllProper:
      return "all-proper";
    case StepsMethod::kGeneralLoose:
      return "general-loose";
    case StepsMethod::kOverride:
      return "override";
  }
  return "unknown";
}

std::string_view to_string(BoundsMethod method) {
  switch (method) {
    case BoundsMethod::kAuto:
      return "auto";
    case BoundsMethod::kPositiveCost:
      return "positive-cost";
    case BoundsMethod::kAllProper:
      return "all-proper";
    case BoundsMethod::kGeneral:
      return "general";
  }
  return "unknown";
}

std::vector<double> StepsBound::effective() const {
  auto out = steps;
  for (StateIndex i : overrides) out[i] = 1.0;
  return out;
}

double StepsBound::max_effective(StateIndex terminal) const {
  const auto eff = effective();
  double m = 0.0;
  for (StateIndex i = 0; i < eff.size(); ++i) {
    if (i != terminal) m = std::max(m, eff[i]);
  }
  return m;
}

SandwichBounds sandwich_bounds(const SspProblem& problem, const ValueFunction& J,
                               std::span<const double> n_optimal,
                               std::span<const double> n_greedy) {
  const std::size_t n = problem.num_states();
  if (n_optimal.size() != n || n_greedy.size() != n) {
    throw std::invalid_argument("steps bounds must have one entry per state");
  }
  const auto stats = bellman_residual(problem, J);
  auto envelope = [&](double c, double steps, StateIndex i) {
    if (c == 0.0) return J[i];
    if (std::isinf(steps)) {
      throw InfiniteStepsBoundError(
          "infinite steps bound at state " + std::to_string(i) +
              " with a nonzero residual extreme",
          i);
    }
    return J[i] + c * steps;
  };
  SandwichBounds out{std::vector<double>(n), std::vector<double>(n)};
  for (StateIndex i = 0; i < n; ++i) {
    if (i == problem.terminal()) continue;
    out.lower[i] = envelope(stats.c_under, n_optimal[i], i);
    out.upper[i] = envelope(stats.c_bar, n_greedy[i], i);
  }
  return out;
}

std::vector<double> per_state_bound(const SspProblem& problem,
                                    const ValueFunction& J,
                                    std::span<const double> steps) {
  if (steps.size() != problem.num_states()) {
    throw std::invalid_argument("steps bound must have one entry per state");
  }
  require_uniformly_improvable(problem, J);
  const double residual = bellman_residual(problem, J).residual;
  std::vector<double> out(steps.size(), 0.0);
  for (StateIndex i = 0; i < steps.size(); ++i) {
    if (i != problem.terminal()) out[i] = scaled(residual, steps[i]);
  }
  return out;
}

std::vector<double> per_state_bound(const SspProblem& problem,
                                    const ValueFunction& J,
                                    const StepsBound& steps) {
  return per_state_bound(problem, J, steps.effective());
}

double global_bound(const SspProblem& problem, const ValueFunction& J,
                    std::span<const double> steps) {
  if (steps.size() != problem.num_states()) {
    throw std::invalid_argument("steps bound must have one entry per state");
  }
  require_uniformly_improvable(problem, J);
  double m = 0.0;
  for (StateIndex i = 0; i < steps.size(); ++i) {
    if (i != problem.terminal()) m = std::max(m, steps[i]);
  }
  return scaled(bellman_residual(problem, J).residual, m);
}

double global_bound(const SspProblem& problem, const ValueFunction& J,
                    const StepsBound& steps) {
  return global_bound(problem, J, steps.effective());
}

StepsBound steps_bound_positive_costs(const SspProblem& problem,
                                      const ValueFunction& J,
                                      StepCostFloor floor) {
  require_uniformly_improvable(problem, J);
  const std::size_t n = problem.num_states();
  const StateIndex t = problem.terminal();

  std::vector<TransitionRef> offenders;
  std::optional<double> b;
  for (StateIndex i = 0; i < n; ++i) {
    if (i == t) continue;
    for (ActionIndex u = 0; u < problem.num_actions(); ++u) {
      const auto p = problem.probs(i, u);
      const auto g = problem.costs(i, u);
      double mass = 0.0;
      double weighted = 0.0;
      for (StateIndex j = 0; j < n; ++j) {
        if (j == t || p[j] == 0.0) continue;
        if (!(g[j] > 0.0)) offenders.push_back({i, u, j});
        mass += p[j];
        weighted += p[j] * g[j];
        if (floor == StepCostFloor::kMinTransition) b = b ? std::min(*b, g[j]) : g[j];
      }
      if (floor == StepCostFloor::kMinExpected && mass > 0.0) {
        const double mean = weighted / mass;
        b = b ? std::min(*b, mean) : mean;
      }
    }
  }
  if (!offenders.empty()) {
    std::ostringstream msg;
    msg << offenders.size() << " nonterminal transition(s) with nonpositive cost, first ("
        << offenders[0].from << ", " << offenders[0].action << ", " << offenders[0].to << ")";
    throw NonpositiveCostError(msg.str(), std::move(offenders));
  }
  const auto a = min_terminal_cost(problem);
  if (!a) throw NoTerminalTransitionError("no transition into the terminal state");

  StepsBound out;
  out.method = StepsMethod::kPositiveCost;
  out.terminal_cost_floor = *a;
  out.step_cost_floor = b.value_or(kInfinity);
  out.steps.assign(n, 0.0);
  for (StateIndex i = 0; i < n; ++i) {
    if (i == t) continue;
    // With no nonterminal transition at all (b infinite) every state exits
    // in one step.
    double steps = b ? (J[i] - *a) / *b + 1.0 : 1.0;
    if (steps < 1.0) {
      steps = 1.0;
      out.clamped.push_back(i);
    }
    out.steps[i] = steps;
  }
  out.overrides = immediate_exit_states(problem);
  return out;
}

StepsBound steps_bound_all_proper(const SspProblem& problem) {
  const auto check = all_policies_proper(problem);
  if (!check.all_proper) {
    std::ostringstream msg;
    msg << "not all policies are proper: states";
    for (StateIndex i : check.witness_states) msg << ' ' << i;
    msg << " can avoid the terminal forever";
    throw NotAllPoliciesProperError(msg.str(), check.witness_states,
                                    check.witness_actions);
  }
  const std::size_t n = problem.num_states();
  const StateIndex t = problem.terminal();
  std::vector<double> cost(problem.cost_tensor().size(), 0.0);
  for (StateIndex i = 0; i < n; ++i) {
    for (ActionIndex u = 0; u < problem.num_actions(); ++u) {
      for (StateIndex j = 0; j < n; ++j) {
        if (j != t) cost[(i * problem.num_actions() + u) * n + j] = -1.0;
      }
    }
  }
  const SspProblem companion(n, problem.num_actions(), t, problem.prob_tensor(),
                             std::move(cost));
  // Any policy is proper here, so policy iteration may start anywhere.
  const auto solved = policy_iteration(
      companion, DeterministicPolicy(std::vector<ActionIndex>(n, 0)), 10'000);

  StepsBound out;
  out.method = StepsMethod::kAllProper;
  out.steps.assign(n, 0.0);
  for (StateIndex i = 0; i < n; ++i) {
    if (i != t) out.steps[i] = 1.0 - solved.value[i];
  }
  out.overrides = immediate_exit_states(problem);
  return out;
}

HorizonCertificate horizon_m_general(const SspProblem& problem,
                                     const ValueFunction& J,
                                     HorizonOptions options) {
  require_uniformly_improvable(problem, J);
  const std::size_t n = problem.num_states();
  const StateIndex t = problem.terminal();
  const auto a = min_terminal_cost(problem);
  if (!a) throw NoTerminalTransitionError("no transition into the terminal state");
  const double nan = std::numeric_limits<double>::quiet_NaN();

  HorizonCertificate cert;
  cert.terminal_cost_floor = *a;
  std::vector<bool> in_t(n, false);
  in_t[t] = true;
  std::vector<double> stage(n, 0.0);
  stage[t] = nan;

  auto exceeds = [&](const std::vector<double>& values) {
    const double offset =
        options.criterion == HorizonCriterion::kWithTerminalCost ? *a : 0.0;
    for (StateIndex i = 0; i < n; ++i) {
      if (!in_t[i] && !(values[i] + offset > J[i])) return false;
    }
    return true;
  };
  auto record = [&]() {
    cert.terminating_sets.push_back(members(in_t));
    cert.stage_values.push_back(stage);
  };

  record();
  if (exceeds(stage)) {
    cert.m = 1;
    return cert;
  }
  for (std::size_t k = 1; k <= options.max_stages; ++k) {
    // Decisions at stage k look only at T_{k-1} and J_{k-1}.
    std::vector<bool> next_t = in_t;
    std::vector<double> next(n, nan);
    for (StateIndex i = 0; i < n; ++i) {
      if (in_t[i]) continue;
      double best = kInfinity;
      for (ActionIndex u = 0; u < problem.num_actions(); ++u) {
        const auto p = problem.probs(i, u);
        const auto g = problem.costs(i, u);
        bool avoids = true;
        double q = 0.0;
        for (StateIndex j = 0; j < n && avoids; ++j) {
          if (p[j] == 0.0) continue;
          if (in_t[j]) {
            avoids = false;
          } else {
            q += p[j] * (g[j] + stage[j]);
          }
        }
        if (avoids) best = std::min(best, q);
      }
      if (std::isinf(best)) {
        next_t[i] = true;
      } else {
        next[i] = best;
      }
    }
    in_t = std::move(next_t);
    stage = std::move(next);
    record();
    if (std::all_of(in_t.begin(), in_t.end(), [](bool b) { return b; })) {
      cert.m = k;
      return cert;
    }
    if (exceeds(stage)) {
      cert.m = k + 1;
      return cert;
    }
  }
  throw HorizonCapExceededError(
      "no termination horizon found within " + std::to_string(options.max_stages) +
          " stages; some nonterminal cycle can be followed at no cost",
      options.max_stages);
}

StepsBound loose_general_bound(const SspProblem& problem,
                               const HorizonCertificate& certificate) {
  const std::size_t n = problem.num_states();
  const StateIndex t = problem.terminal();
  std::optional<double> p_t;
  double p_n = 1.0;
  for (StateIndex i = 0; i < n; ++i) {
    if (i == t) continue;
    for (ActionIndex u = 0; u < problem.num_actions(); ++u) {
      const auto p = problem.probs(i, u);
      for (StateIndex j = 0; j < n; ++j) {
        if (p[j] <= 0.0) continue;
        if (j == t) {
          p_t = p_t ? std::min(*p_t, p[j]) : p[j];
        } else {
          p_n = std::min(p_n, p[j]);
        }
      }
    }
  }
  if (!p_t) throw NoTerminalTransitionError("no transition into the terminal state");
  const double m = static_cast<double>(std::max<std::size_t>(certificate.m, 1));
  const double rho = std::pow(p_n, m - 1.0) * *p_t;

  StepsBound out;
  out.method = StepsMethod::kGeneralLoose;
  out.steps.assign(n, 0.0);
  for (StateIndex i = 0; i < n; ++i) {
    if (i != t) out.steps[i] = rho > 0.0 ? m / rho : kInfinity;
  }
  out.overrides = immediate_exit_states(problem);
  return out;
}

MonteCarloEstimate monte_carlo_steps(const SspProblem& problem,
                                     const Policy& policy, StateIndex start,
                                     std::size_t trials, std::uint64_t seed,
                                     std::size_t cap) {
  check_policy(problem, policy);
  if (start >= problem.num_states()) throw std::out_of_range("start state out of range");
  if (trials == 0 || cap == 0) throw std::invalid_argument("trials and cap must be positive");
  const StateIndex t = problem.terminal();
  const std::size_t n = problem.num_states();

  auto draw = [](std::span<const double> weights, double r) {
    double acc = 0.0;
    std::size_t last = 0;
    for (std::size_t k = 0; k < weights.size(); ++k) {
      if (weights[k] <= 0.0) continue;
      acc += weights[k];
      last = k;
      if (r < acc) return k;
    }
    return last;
  };
  const auto* det = std::get_if<DeterministicPolicy>(&policy);
  const auto* stoch = std::get_if<StochasticPolicy>(&policy);

  MonteCarloEstimate est;
  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::size_t trial = 0; trial < trials; ++trial) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(trial),
                      static_cast<std::uint32_t>(static_cast<std::uint64_t>(trial) >> 32)};
    std::mt19937_64 rng(seq);
    auto uniform = [&rng]() { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };

    StateIndex state = start;
    std::size_t steps = 0;
    while (state != t && steps < cap) {
      const ActionIndex u = det ? (*det)[state] : draw(stoch->weights(state), uniform());
      state = draw(problem.probs(state, u), uniform());
      ++steps;
    }
    if (state != t) {
      ++est.capped;
      continue;
    }
    ++est.completed;
    sum += static_cast<double>(steps);
    sum_sq += static_cast<double>(steps) * static_cast<double>(steps);
  }
  (void)n;
  if (est.completed > 0) {
    const double count = static_cast<double>(est.completed);
    est.mean = sum / count;
    if (est.completed > 1) {
      const double var = std::max(0.0, (sum_sq - count * est.mean * est.mean) / (count - 1.0));
      est.std_error = std::sqrt(var / count);
    }
    est.ci95 = 1.96 * est.std_error;
  }
  return est;
}

BoundsMethod resolve_bounds_method(const SspProblem& problem) {
  const StateIndex t = problem.terminal();
  bool positive = true;
  for (StateIndex i = 0; i < problem.num_states() && positive; ++i) {
    if (i == t) continue;
    for (ActionIndex u = 0; u < problem.num_actions() && positive; ++u) {
      const auto p = problem.probs(i, u);
      const auto g = problem.costs(i, u);
      for (StateIndex j = 0; j < problem.num_states(); ++j) {
        if (j != t && p[j] > 0.0 && !(g[j] > 0.0)) {
          positive = false;
          break;
        }
      }
    }
  }
  if (positive) return BoundsMethod::kPositiveCost;
  if (all_policies_proper(problem).all_proper) return BoundsMethod::kAllProper;
  return BoundsMethod::kGeneral;
}

StepsBound steps_bound(const SspProblem& problem, const ValueFunction& J,
                       BoundsMethod method,
                       std::optional<HorizonCertificate>* certificate) {
  if (method == BoundsMethod::kAuto) method = resolve_bounds_method(problem);
  switch (method) {
    case BoundsMethod::kPositiveCost:
      return steps_bound_positive_costs(problem, J);
    case BoundsMethod::kAllProper:
      return steps_bound_all_proper(problem);
    case BoundsMethod::kGeneral:
    case BoundsMethod::kAuto: {
      auto cert = horizon_m_general(problem, J);
      auto out = loose_general_bound(problem, cert);
      if (certificate) *certificate = std::move(cert);
      return out;
    }
  }
  throw std::logic_error("unhandled bounds method");
}

BoundsReport bounds_report(const SspProblem& problem, const ValueFunction& J,
                           BoundsMethod method) {
  BoundsReport report;
  report.method = method == BoundsMethod::kAuto ? resolve_bounds_method(problem) : method;
  report.stats = bellman_residual(problem, J);
  if (report.method != BoundsMethod::kAllProper) require_uniformly_improvable(problem, J);

  report.steps = steps_bound(problem, J, report.method, &report.certificate);
  if (report.method == BoundsMethod::kPositiveCost) {
    report.expected_floor_steps =
        steps_bound_positive_costs(problem, J, StepCostFloor::kMinExpected);
  }

  // With every policy proper the same N bounds both the optimal and the
  // greedy policy, so residual * N holds without TJ <= J.
  const auto eff = report.steps.effective();
  const StateIndex t = problem.terminal();
  report.per_state.assign(eff.size(), 0.0);
  double m = 0.0;
  for (StateIndex i = 0; i < eff.size(); ++i) {
    if (i == t) continue;
    report.per_state[i] = scaled(report.stats.residual, eff[i]);
    m = std::max(m, eff[i]);
  }
  report.global = scaled(report.stats.residual, m);
  report.vacuous = std::isinf(report.global);
  return report;
}

std::vector<TraceRow> summarize_trace(const SspProblem& problem,
                                      const IterationTrace& trace,
                                      BoundsMethod method, bool reward_form) {
  if (method == BoundsMethod::kAuto) method = resolve_bounds_method(problem);
  const StateIndex t = problem.terminal();
  std::optional<StepsBound> fixed;
  if (method == BoundsMethod::kAllProper) fixed = steps_bound_all_proper(problem);

  std::vector<TraceRow> rows;
  for (std::size_t k = 0; k < trace.size(); ++k) {
    const auto& J = trace[k].value;
    const StepsBound steps = fixed ? *fixed : steps_bound(problem, J, method);
    const auto skip = membership(problem.num_states(), steps.overrides);

    TraceRow row;
    row.iteration = trace[k].iteration;
    bool first = true;
    for (StateIndex i = 0; i < problem.num_states(); ++i) {
      if (i == t || skip[i]) continue;
      const double v = reward_form ? -J[i] : J[i];
      if (first || (reward_form ? v < row.worst_value : v > row.worst_value)) {
        row.worst_value = v;
        first = false;
      }
    }
    row.m = steps.max_effective(t);
    if (k > 0) {
      row.residual = trace[k - 1].stats.residual;
      row.error = scaled(*row.residual, row.m);
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace ssp
