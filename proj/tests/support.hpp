// Test instances and independent oracles. The oracles work on the raw
// probability/cost tensors with their own loops and never call into the
// dp or bounds modules.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <optional>
#include <random>
#include <vector>

#include "ssp/problem.hpp"

namespace ssp::testing {

inline constexpr ActionIndex kGo = 0;
inline constexpr ActionIndex kStay = 1;
inline constexpr StateIndex kBtState = 1;

// Two states: 0 is the terminal; from state 1, "go" reaches the terminal at
// cost 2 and "stay" loops at cost 1.
inline SspProblem bt_instance() {
  return ProblemBuilder(2, 2, 0)
      .absorbing_terminal()
      .transition(kBtState, kGo, 0, 1.0, 2.0)
      .transition(kBtState, kStay, kBtState, 1.0, 1.0)
      .build();
}

inline ValueFunction values(std::vector<double> v, StateIndex terminal) {
  return ValueFunction(std::move(v), terminal);
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline std::size_t pick(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

// Random distribution over `support` (nonempty), every entry positive.
inline std::vector<double> random_simplex(std::mt19937_64& rng, std::size_t k) {
  std::vector<double> w(k);
  double total = 0.0;
  for (auto& x : w) total += (x = uniform(rng, 0.05, 1.0));
  for (auto& x : w) x /= total;
  return w;
}

struct RandomShape {
  std::size_t min_states = 2;  // including the terminal
  std::size_t max_states = 8;
  std::size_t min_actions = 1;
  std::size_t max_actions = 4;
};

namespace detail {

// Fills one (i,u) row: `forced` successors always get mass, a few random
// extra successors may be added. Probabilities sum to exactly 1 because the
// last entry takes the remainder.
inline void fill_row(std::mt19937_64& rng, std::vector<double>& prob, std::size_t base,
                     std::size_t n, const std::vector<StateIndex>& forced) {
  std::vector<StateIndex> support = forced;
  const std::size_t extra = pick(rng, 0, std::min<std::size_t>(2, n - 1));
  for (std::size_t k = 0; k < extra; ++k) support.push_back(pick(rng, 0, n - 1));
  std::sort(support.begin(), support.end());
  support.erase(std::unique(support.begin(), support.end()), support.end());
  const auto w = random_simplex(rng, support.size());
  double used = 0.0;
  for (std::size_t k = 0; k + 1 < support.size(); ++k) {
    prob[base + support[k]] = w[k];
    used += w[k];
  }
  prob[base + support.back()] = 1.0 - used;
}

inline void make_terminal_absorbing(std::vector<double>& prob, std::vector<double>& cost,
                                    std::size_t n, std::size_t m, StateIndex t) {
  for (ActionIndex u = 0; u < m; ++u) {
    const std::size_t base = (t * m + u) * n;
    for (std::size_t j = 0; j < n; ++j) {
      prob[base + j] = j == t ? 1.0 : 0.0;
      cost[base + j] = 0.0;
    }
  }
}

}  // namespace detail

// Every (i,u) reaches the terminal with positive probability, so every
// policy is proper. Costs in [-1, 1].
inline SspProblem random_all_proper(std::mt19937_64& rng, RandomShape shape = {}) {
  const std::size_t n = pick(rng, shape.min_states, shape.max_states);
  const std::size_t m = pick(rng, shape.min_actions, shape.max_actions);
  const StateIndex t = pick(rng, 0, n - 1);
  std::vector<double> prob(n * m * n, 0.0);
  std::vector<double> cost(n * m * n, 0.0);
  for (StateIndex i = 0; i < n; ++i) {
    for (ActionIndex u = 0; u < m; ++u) {
      const std::size_t base = (i * m + u) * n;
      detail::fill_row(rng, prob, base, n, {t});
      for (std::size_t j = 0; j < n; ++j) cost[base + j] = uniform(rng, -1.0, 1.0);
    }
  }
  detail::make_terminal_absorbing(prob, cost, n, m, t);
  return SspProblem(n, m, t, std::move(prob), std::move(cost));
}

// Action 0 always moves one step down a random ordering of the nonterminal
// states (the lowest goes to the terminal), so a proper policy exists. Other
// actions are arbitrary and may cycle. Costs have mixed signs, shifted so
// that any (i,u) with no terminal mass has expected cost >= 0.1: every
// improper policy then accumulates unbounded cost.
inline SspProblem random_with_proper_policy(std::mt19937_64& rng, RandomShape shape = {}) {
  const std::size_t n = pick(rng, shape.min_states, shape.max_states);
  const std::size_t m = pick(rng, std::max<std::size_t>(shape.min_actions, 1), shape.max_actions);
  const StateIndex t = pick(rng, 0, n - 1);
  std::vector<StateIndex> order;
  for (StateIndex i = 0; i < n; ++i) {
    if (i != t) order.push_back(i);
  }
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<double> prob(n * m * n, 0.0);
  std::vector<double> cost(n * m * n, 0.0);
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    const StateIndex i = order[rank];
    for (ActionIndex u = 0; u < m; ++u) {
      const std::size_t base = (i * m + u) * n;
      std::vector<StateIndex> forced;
      if (u == 0) forced.push_back(rank == 0 ? t : order[rank - 1]);
      if (forced.empty()) forced.push_back(pick(rng, 0, n - 1));
      detail::fill_row(rng, prob, base, n, forced);
      double expected = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        cost[base + j] = uniform(rng, -1.0, 1.0);
        expected += prob[base + j] * cost[base + j];
      }
      if (prob[base + t] == 0.0 && expected < 0.1) {
        const double shift = 0.1 - expected + uniform(rng, 0.0, 0.5);
        for (std::size_t j = 0; j < n; ++j) cost[base + j] += shift;
      }
    }
  }
  detail::make_terminal_absorbing(prob, cost, n, m, t);
  return SspProblem(n, m, t, std::move(prob), std::move(cost));
}

// As random_with_proper_policy but every nonterminal transition costs in
// [0.05, 1] and terminal transitions cost in [-1, 1].
inline SspProblem random_positive_cost(std::mt19937_64& rng, RandomShape shape = {}) {
  const SspProblem base = random_with_proper_policy(rng, shape);
  std::vector<double> cost = base.cost_tensor();
  const std::size_t n = base.num_states();
  const std::size_t m = base.num_actions();
  for (StateIndex i = 0; i < n; ++i) {
    if (i == base.terminal()) continue;
    for (ActionIndex u = 0; u < m; ++u) {
      for (StateIndex j = 0; j < n; ++j) {
        cost[(i * m + u) * n + j] =
            j == base.terminal() ? uniform(rng, -1.0, 1.0) : uniform(rng, 0.05, 1.0);
      }
    }
  }
  return SspProblem(n, m, base.terminal(), base.prob_tensor(), std::move(cost));
}

inline DiscountedMdp random_discounted(std::mt19937_64& rng, std::size_t n, std::size_t m) {
  DiscountedMdp mdp{n, m, std::vector<double>(n * m * n, 0.0),
                    std::vector<double>(n * m * n, 0.0)};
  for (StateIndex i = 0; i < n; ++i) {
    for (ActionIndex u = 0; u < m; ++u) {
      const std::size_t base = (i * m + u) * n;
      detail::fill_row(rng, mdp.prob, base, n, {pick(rng, 0, n - 1)});
      for (std::size_t j = 0; j < n; ++j) mdp.cost[base + j] = uniform(rng, -1.0, 1.0);
    }
  }
  return mdp;
}

// ---------------------------------------------------------------------------
// Oracles

inline double raw_q(const SspProblem& p, const std::vector<double>& J, StateIndex i,
                    ActionIndex u) {
  double q = 0.0;
  for (StateIndex j = 0; j < p.num_states(); ++j) {
    q += p.prob(i, u, j) * (p.cost(i, u, j) + J[j]);
  }
  return q;
}

// Plain Jacobi value iteration from 0 until successive iterates differ by
// less than `tol`. Only meaningful when every policy is proper.
inline std::vector<double> oracle_value_iteration(const SspProblem& p, double tol = 1e-12,
                                                  std::size_t max_sweeps = 10'000'000) {
  std::vector<double> J(p.num_states(), 0.0);
  for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
    std::vector<double> next(p.num_states(), 0.0);
    double diff = 0.0;
    for (StateIndex i = 0; i < p.num_states(); ++i) {
      if (i == p.terminal()) continue;
      double best = std::numeric_limits<double>::infinity();
      for (ActionIndex u = 0; u < p.num_actions(); ++u) best = std::min(best, raw_q(p, J, i, u));
      next[i] = best;
      diff = std::max(diff, std::abs(best - J[i]));
    }
    J = std::move(next);
    if (diff < tol) break;
  }
  return J;
}

// Terminal reachable from every state under the deterministic policy.
inline bool oracle_proper(const SspProblem& p, const std::vector<ActionIndex>& mu) {
  const std::size_t n = p.num_states();
  std::vector<bool> reach(n, false);
  reach[p.terminal()] = true;
  for (bool changed = true; changed;) {
    changed = false;
    for (StateIndex i = 0; i < n; ++i) {
      if (reach[i]) continue;
      for (StateIndex j = 0; j < n; ++j) {
        if (reach[j] && p.prob(i, mu[i], j) > 0.0) {
          reach[i] = changed = true;
          break;
        }
      }
    }
  }
  return std::all_of(reach.begin(), reach.end(), [](bool b) { return b; });
}

// Gaussian elimination with partial pivoting on (I - P) J = g over the
// nonterminal states.
inline std::vector<double> oracle_policy_value(const SspProblem& p,
                                               const std::vector<ActionIndex>& mu) {
  const std::size_t n = p.num_states();
  std::vector<StateIndex> idx;
  for (StateIndex i = 0; i < n; ++i) {
    if (i != p.terminal()) idx.push_back(i);
  }
  const std::size_t k = idx.size();
  std::vector<std::vector<double>> a(k, std::vector<double>(k + 1, 0.0));
  for (std::size_t r = 0; r < k; ++r) {
    const StateIndex i = idx[r];
    a[r][r] = 1.0;
    for (std::size_t c = 0; c < k; ++c) a[r][c] -= p.prob(i, mu[i], idx[c]);
    for (StateIndex j = 0; j < n; ++j) a[r][k] += p.prob(i, mu[i], j) * p.cost(i, mu[i], j);
  }
  for (std::size_t col = 0; col < k; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < k; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    }
    std::swap(a[col], a[piv]);
    for (std::size_t r = 0; r < k; ++r) {
      if (r == col) continue;
      const double f = a[r][col] / a[col][col];
      for (std::size_t c = col; c <= k; ++c) a[r][c] -= f * a[col][c];
    }
  }
  std::vector<double> J(n, 0.0);
  for (std::size_t r = 0; r < k; ++r) J[idx[r]] = a[r][k] / a[r][r];
  return J;
}

// Elementwise minimum over all proper deterministic policies. Under the
// standing assumptions this is J*.
inline std::vector<double> oracle_brute_force(const SspProblem& p) {
  const std::size_t n = p.num_states();
  std::vector<double> best(n, std::numeric_limits<double>::infinity());
  best[p.terminal()] = 0.0;
  std::vector<ActionIndex> mu(n, 0);
  while (true) {
    if (oracle_proper(p, mu)) {
      const auto J = oracle_policy_value(p, mu);
      for (StateIndex i = 0; i < n; ++i) best[i] = std::min(best[i], J[i]);
    }
    std::size_t pos = 0;
    while (pos < n && (pos == p.terminal() || mu[pos] + 1 == p.num_actions())) {
      if (pos != p.terminal()) mu[pos] = 0;
      ++pos;
    }
    if (pos == n) break;
    ++mu[pos];
  }
  return best;
}

// Exact expected number of transitions to the terminal under mu.
inline std::vector<double> oracle_expected_steps(const SspProblem& p,
                                                 const std::vector<ActionIndex>& mu) {
  std::vector<double> unit(p.cost_tensor().size(), 1.0);
  for (std::size_t x = 0; x < unit.size(); ++x) {
    if (x / (p.num_actions() * p.num_states()) == p.terminal()) unit[x] = 0.0;
  }
  const SspProblem counting(p.num_states(), p.num_actions(), p.terminal(), p.prob_tensor(),
                            std::move(unit));
  return oracle_policy_value(counting, mu);
}

// reach[i]: the terminal is reachable from i within `horizon` transitions
// along positive-probability edges of mu.
inline std::vector<bool> oracle_reach_within(const SspProblem& p,
                                             const std::vector<ActionIndex>& mu,
                                             std::size_t horizon) {
  const std::size_t n = p.num_states();
  std::vector<bool> reach(n, false);
  reach[p.terminal()] = true;
  for (std::size_t k = 0; k < horizon; ++k) {
    auto next = reach;
    for (StateIndex i = 0; i < n; ++i) {
      for (StateIndex j = 0; j < n; ++j) {
        if (reach[j] && p.prob(i, mu[i], j) > 0.0) next[i] = true;
      }
    }
    reach = std::move(next);
  }
  return reach;
}

struct RolloutStats {
  double mean = 0.0;
  std::size_t completed = 0;
  std::size_t within = 0;  // rollouts that terminated within `horizon` steps
};

// Independent simulator: std::discrete_distribution on each row.
inline RolloutStats oracle_rollouts(const SspProblem& p, const std::vector<ActionIndex>& mu,
                                    StateIndex start, std::size_t trials, std::uint64_t seed,
                                    std::size_t cap, std::size_t horizon = 0) {
  std::mt19937_64 rng(seed);
  RolloutStats out;
  double total = 0.0;
  for (std::size_t k = 0; k < trials; ++k) {
    StateIndex s = start;
    std::size_t steps = 0;
    while (s != p.terminal() && steps < cap) {
      const auto row = p.probs(s, mu[s]);
      std::discrete_distribution<std::size_t> next(row.begin(), row.end());
      s = next(rng);
      ++steps;
    }
    if (s != p.terminal()) continue;
    ++out.completed;
    total += static_cast<double>(steps);
    if (steps <= horizon) ++out.within;
  }
  if (out.completed) out.mean = total / static_cast<double>(out.completed);
  return out;
}

}  // namespace ssp::testing
