"""
Brute-force ground truth for small instances.

Every value here comes from the literal definitions: enumerate every
deterministic policy, play it against every scenario path, take the
extremes. Nothing is pruned or memoized beyond the policy list itself.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

from BackEnd_01_ARC_Core import (
    DEFAULT_MAX_POLICIES,
    DEFAULT_MAX_SCENARIOS,
    VALUE_ATOL,
    ARCDomainError,
    ARCInputError,
    PolicyTable,
    TreeProblem,
    enumerate_policies,
    play_policy,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EnumerationBudget:
    max_policies: int = DEFAULT_MAX_POLICIES
    max_scenarios: int = DEFAULT_MAX_SCENARIOS

    def __post_init__(self):
        if self.max_policies < 1 or self.max_scenarios < 1:
            raise ARCInputError(f"enumeration caps must be positive, got {self}")


DEFAULT_BUDGET = EnumerationBudget()


def _naive_ex_post(problem: TreeProblem, w: tuple) -> float:
    return max(problem.total_reward(x, w) for x in problem.action_sequences(w))


def _outcomes(problem: TreeProblem, budget: EnumerationBudget):
    paths = problem.scenario_paths(limit=budget.max_scenarios)
    policies = enumerate_policies(problem, budget.max_policies)
    star = [_naive_ex_post(problem, w) for w in paths]
    rewards = [[problem.total_reward(play_policy(problem, pi, w), w) for w in paths] for pi in policies]
    return paths, policies, star, rewards


def brute_force_minimax(
    problem: TreeProblem, beta: float, budget: EnumerationBudget = DEFAULT_BUDGET
) -> tuple[float, list[PolicyTable]]:
    """min over policies of max over paths of beta * r*(w) - r^pi(w), with every minimizer."""
    beta = float(beta)
    if beta < 0:
        raise ARCInputError(f"beta must be nonnegative, got {beta}")
    paths, policies, star, rewards = _outcomes(problem, budget)
    worst = [max(beta * s - r for s, r in zip(star, row)) for row in rewards]
    value = min(worst)
    optimal = [pi for pi, v in zip(policies, worst) if v <= value + VALUE_ATOL]
    logger.debug("%s: oracle D(%g) = %.12g, %d of %d policies optimal", problem.name, beta, value, len(optimal), len(policies))
    return value, optimal


def brute_force_cr(problem: TreeProblem, budget: EnumerationBudget = DEFAULT_BUDGET) -> float:
    paths, policies, star, rewards = _outcomes(problem, budget)
    for w, s in zip(paths, star):
        if s <= 0:
            raise ARCDomainError(f"{problem.name}: r*({list(w)}) = {s} is not positive")
    return max(min(r / s for s, r in zip(star, row)) for row in rewards)


def brute_force_maximin(problem: TreeProblem, budget: EnumerationBudget = DEFAULT_BUDGET) -> float:
    _, _, _, rewards = _outcomes(problem, budget)
    return max(min(row) for row in rewards)
