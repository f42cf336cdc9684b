"""
Regret curves, competitive ratio extraction and executable checks of the
structural properties of D(beta) on finite instances.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
import pandas as pd
from scipy import optimize

from BackEnd_01_ARC_Core import (
    DEFAULT_MAX_POLICIES,
    ARCDomainError,
    ARCInputError,
    ARCModelError,
    ArcValue,
    PolicyTable,
    TreeProblem,
    enumerate_policies,
    ex_post_vector,
    play_policy,
    reward_profiles,
    solve_plain,
)

logger = logging.getLogger(__name__)

DEFAULT_TOLERANCE = 1e-9
MAX_BISECTION_ITERATIONS = 200
MAX_BRACKET_DOUBLINGS = 60
SET_TOLERANCE = 1e-6
DEFAULT_LAMBDA_GRID = tuple(k / 16 for k in range(1, 16))

Solver = Callable[[TreeProblem, float], ArcValue]

CURVE_COLUMNS = ["beta", "value", "policy_id"]


@dataclass(frozen=True)
class CurveSample:
    beta: float
    value: float
    policy_id: str


@dataclass(frozen=True)
class RegretCurve:
    samples: tuple
    problem_id: str

    def __post_init__(self):
        betas = [s.beta for s in self.samples]
        if any(b < 0 or not math.isfinite(b) for b in betas):
            raise ARCInputError(f"{self.problem_id}: betas must be finite and nonnegative")
        if any(b2 <= b1 for b1, b2 in zip(betas, betas[1:])):
            raise ARCInputError(f"{self.problem_id}: betas must be strictly increasing")
        if any(not math.isfinite(s.value) for s in self.samples):
            raise ARCInputError(f"{self.problem_id}: curve values must be finite")

    @property
    def betas(self) -> np.ndarray:
        return np.array([s.beta for s in self.samples], dtype=float)

    @property
    def values(self) -> np.ndarray:
        return np.array([s.value for s in self.samples], dtype=float)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            [(s.beta, s.value, s.policy_id) for s in self.samples],
            columns=CURVE_COLUMNS,
        )

    @classmethod
    def from_frame(cls, frame: pd.DataFrame, problem_id: str = "curve") -> RegretCurve:
        missing = [c for c in CURVE_COLUMNS if c not in frame.columns]
        if missing:
            raise ARCInputError(f"curve table lacks columns {missing}")
        samples = tuple(
            CurveSample(float(b), float(v), str(p))
            for b, v, p in frame[CURVE_COLUMNS].itertuples(index=False, name=None)
        )
        return cls(samples, problem_id)


@dataclass(frozen=True)
class SlopeWitness:
    beta1: float
    beta2: float
    scenario_21: tuple
    scenario_12: tuple
    r_star_21: float
    r_star_12: float
    quotient: float

    @property
    def holds(self) -> bool:
        return self.r_star_21 + DEFAULT_TOLERANCE >= self.quotient >= self.r_star_12 - DEFAULT_TOLERANCE


@dataclass(frozen=True)
class CrResult:
    beta0: float
    tolerance: float
    iterations: int
    degenerate: bool
    d_zero: float
    upper_bracket: float = 1.0
    converged: bool = True


def regret_curve(problem: TreeProblem, betas: Sequence[float], solver: Solver = solve_plain) -> RegretCurve:
    betas = [float(b) for b in betas]
    if any(b2 <= b1 for b1, b2 in zip(betas, betas[1:])):
        raise ARCInputError(f"{problem.name}: betas must be strictly increasing, got {betas}")
    samples = []
    for beta in betas:
        result = solver(problem, beta)
        samples.append(CurveSample(beta, float(result.value), result.policy.policy_id))
    return RegretCurve(tuple(samples), problem.name)


def ratio_root(
    value_at: Callable[[float], float],
    tol: float = DEFAULT_TOLERANCE,
    max_iter: int = MAX_BISECTION_ITERATIONS,
    label: str = "D",
) -> CrResult:
    """
    Root of a nondecreasing D(beta) by bisection on [0, 1].
    D(0) >= 0 is reported as degenerate; D(1) < 0 widens the bracket by doubling.
    """
    if not tol > 0:
        raise ARCInputError(f"tolerance must be positive, got {tol}")
    d_zero = float(value_at(0.0))
    if d_zero >= 0:
        logger.info("%s: D(0) = %g >= 0, competitive ratio is degenerate", label, d_zero)
        return CrResult(0.0, tol, 0, True, d_zero, upper_bracket=0.0)

    hi, doublings = 1.0, 0
    while value_at(hi) < 0:
        if doublings >= MAX_BRACKET_DOUBLINGS:
            raise ARCModelError(f"{label}: no sign change found up to beta = {hi}")
        hi *= 2.0
        doublings += 1
    if doublings:
        logger.warning("%s: D(1) < 0, bracket widened to [0, %g]", label, hi)

    root, info = optimize.bisect(value_at, 0.0, hi, xtol=tol, maxiter=max_iter, full_output=True, disp=False)
    if not info.converged:
        logger.warning("%s: bisection stopped after %d iterations", label, info.iterations)
    return CrResult(float(root), tol, int(info.iterations), False, d_zero, upper_bracket=hi, converged=bool(info.converged))


def competitive_ratio(problem: TreeProblem, tol: float = DEFAULT_TOLERANCE, solver: Solver = solve_plain) -> CrResult:
    result = ratio_root(lambda beta: solver(problem, beta).value, tol=tol, label=problem.name)
    logger.debug("%s: beta0 = %.12g after %d iterations", problem.name, result.beta0, result.iterations)
    return result


def policy_ratio(problem: TreeProblem, policy: PolicyTable) -> float:
    """min over scenarios of r^pi(w) / r*(w); needs r* > 0 everywhere."""
    paths = problem.scenario_paths()
    star = ex_post_vector(problem, paths)
    _require_positive_star(problem, paths, star)
    rewards = np.array([problem.total_reward(play_policy(problem, policy, w), w) for w in paths])
    return float(np.min(rewards / star))


def _require_positive_star(problem: TreeProblem, paths: Sequence[tuple], star: np.ndarray):
    bad = np.flatnonzero(star <= 0)
    if bad.size:
        w = paths[int(bad[0])]
        raise ARCDomainError(f"{problem.name}: r*({list(w)}) = {star[bad[0]]} is not positive")


def cr_policy_set_check(problem: TreeProblem, tol: float = DEFAULT_TOLERANCE, max_policies: int = DEFAULT_MAX_POLICIES) -> bool:
    """argmin of D^pi(beta0) equals argmax of the worst-case ratio, by enumeration."""
    cr = competitive_ratio(problem, tol)
    if cr.degenerate:
        logger.warning("%s: degenerate competitive ratio, policy sets not compared", problem.name)
        return False
    policies = enumerate_policies(problem, max_policies)
    paths = problem.scenario_paths()
    star = ex_post_vector(problem, paths)
    _require_positive_star(problem, paths, star)
    rewards = reward_profiles(problem, policies, paths)

    regret = np.max(cr.beta0 * star - rewards, axis=1)
    ratio = np.min(rewards / star, axis=1)
    regret_set = set(np.flatnonzero(regret <= regret.min() + SET_TOLERANCE).tolist())
    ratio_set = set(np.flatnonzero(ratio >= ratio.max() - SET_TOLERANCE).tolist())
    if regret_set != ratio_set:
        logger.warning("%s: optimal policy sets differ: %s vs %s", problem.name, sorted(regret_set), sorted(ratio_set))
    return regret_set == ratio_set


def _worst_scenario(problem: TreeProblem, policy: PolicyTable, beta: float, paths: Sequence[tuple], star: np.ndarray) -> int:
    regrets = [beta * star[k] - problem.total_reward(play_policy(problem, policy, w), w) for k, w in enumerate(paths)]
    return int(np.argmax(regrets))


def slope_bounds_check(problem: TreeProblem, beta1: float, beta2: float, solver: Solver = solve_plain) -> SlopeWitness:
    if not 0 <= beta1 < beta2:
        raise ARCInputError(f"slope bounds need 0 <= beta1 < beta2, got {beta1}, {beta2}")
    first, second = solver(problem, beta1), solver(problem, beta2)
    paths = problem.scenario_paths()
    star = ex_post_vector(problem, paths)

    k21 = _worst_scenario(problem, first.policy, beta2, paths, star)
    k12 = _worst_scenario(problem, second.policy, beta1, paths, star)
    witness = SlopeWitness(
        beta1=float(beta1),
        beta2=float(beta2),
        scenario_21=paths[k21],
        scenario_12=paths[k12],
        r_star_21=float(star[k21]),
        r_star_12=float(star[k12]),
        quotient=(second.value - first.value) / (beta2 - beta1),
    )
    if not witness.holds:
        logger.warning("%s: slope bound violated: %s", problem.name, witness)
    return witness


def convexity_check(curve: RegretCurve, tol: float = DEFAULT_TOLERANCE) -> bool:
    """Every interior sample lies on or below the chord of its neighbours."""
    if len(curve.samples) < 3:
        raise ARCInputError(f"{curve.problem_id}: convexity check needs at least 3 samples")
    b, v = curve.betas, curve.values
    weight = (b[1:-1] - b[:-2]) / (b[2:] - b[:-2])
    chord = v[:-2] + weight * (v[2:] - v[:-2])
    return bool(np.all(v[1:-1] <= chord + tol))


def is_strictly_increasing(curve: RegretCurve) -> bool:
    return bool(np.all(np.diff(curve.values) > 0))


def rdc_diagnostic(
    problem: TreeProblem,
    lambda_grid: Sequence[float] = DEFAULT_LAMBDA_GRID,
    policies: Sequence[PolicyTable] | None = None,
    max_policies: int = DEFAULT_MAX_POLICIES,
) -> pd.DataFrame:
    """
    Reward dominance convexity, pair by pair: look for a policy whose reward
    profile weakly dominates lam * r^a + (1 - lam) * r^b. The witness is
    searched within `policies` (all policies by default); the pair's own
    members are tried first.
    """
    if any(not 0 < lam < 1 for lam in lambda_grid):
        raise ARCInputError("lambda grid must lie inside (0, 1)")
    if policies is None:
        policies = enumerate_policies(problem, max_policies)
    policies = list(policies)
    paths = problem.scenario_paths()
    profiles = reward_profiles(problem, policies, paths)

    rows = []
    for a in range(len(policies)):
        for b in range(a, len(policies)):
            order = [a, b] + [c for c in range(len(policies)) if c not in (a, b)]
            found = None
            for lam in lambda_grid:
                target = lam * profiles[a] + (1 - lam) * profiles[b]
                ok = np.all(profiles >= target - DEFAULT_TOLERANCE, axis=1)
                hit = next((c for c in order if ok[c]), None)
                if hit is not None:
                    found = (policies[hit].policy_id, lam)
                    break
            rows.append((
                policies[a].policy_id,
                policies[b].policy_id,
                found is not None,
                found[0] if found else None,
                found[1] if found else None,
            ))
    report = pd.DataFrame(rows, columns=["policy_a", "policy_b", "satisfied", "witness", "lam"])
    failures = int((~report["satisfied"]).sum())
    if failures:
        logger.info("%s: %d of %d policy pairs lack a dominating mixture", problem.name, failures, len(report))
    return report
