"""Stochastic shortest path solvers with Bellman-residual suboptimality bounds."""

import json

from . import _core
from ._core import (
    Problem,
    SspError,
    bellman_backup,
    bellman_residual,
    evaluate_policy,
    evaluate_uniform_random,
    from_discounted,
    greedy_policy,
    gridworld,
    is_uniformly_improvable,
    load_problem,
    loose_general_bound,
    parse_problem,
    policy_iteration,
    value_iteration,
)

__all__ = [
    "Problem",
    "SspError",
    "all_policies_proper",
    "bellman_backup",
    "bellman_residual",
    "bounds_report",
    "evaluate_policy",
    "evaluate_uniform_random",
    "from_arrays",
    "from_discounted",
    "greedy_policy",
    "gridworld",
    "horizon_m_general",
    "is_proper",
    "is_uniformly_improvable",
    "load_problem",
    "loose_general_bound",
    "monte_carlo_steps",
    "parse_problem",
    "policy_iteration",
    "table1_csv",
    "table2_csv",
    "value_iteration",
]


def from_arrays(prob, cost, terminal):
    """Build a Problem from (states, actions, states) nested sequences or arrays."""
    import numpy as np

    p = np.asarray(prob, dtype=float)
    c = np.asarray(cost, dtype=float)
    if p.ndim != 3 or p.shape != c.shape or p.shape[0] != p.shape[2]:
        raise ValueError("prob and cost must both have shape (n, m, n)")
    n, m, _ = p.shape
    return Problem(n, m, terminal, p.ravel().tolist(), c.ravel().tolist())


def is_proper(problem, policy):
    return json.loads(_core.is_proper(problem, list(policy)))


def all_policies_proper(problem):
    return json.loads(_core.all_policies_proper(problem))


def bounds_report(problem, values, method="auto"):
    return json.loads(_core.bounds_report(problem, list(values), method))


def horizon_m_general(problem, values, pseudocode_criterion=False, max_stages=1_000_000):
    return json.loads(
        _core.horizon_m_general(problem, list(values), pseudocode_criterion, max_stages)
    )


def monte_carlo_steps(problem, policy, start, trials, seed=0, cap=1_000_000):
    return json.loads(_core.monte_carlo_steps(problem, list(policy), start, trials, seed, cap))


def table1_csv(algorithm="pi"):
    return _core.table1_csv(algorithm)


def table2_csv():
    return _core.table2_csv()
