"""
Adjustable Regret Criterion on finite scenario trees.

A problem alternates stage decisions and stage scenarios for T stages. The
regret of a complete pair (x, w) is beta * r*(w) - r(x, w), where r*(w) is the
ex post optimum. This module holds the problem model, the plain backward
recursion, policy evaluation, relative rewards and dominance reduction.
"""

from __future__ import annotations

import dataclasses
import enum
import functools
import hashlib
import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Hashable, Iterator, Mapping, Sequence

import numpy as np

logger = logging.getLogger(__name__)

VALUE_ATOL = 1e-9
DEFAULT_MAX_POLICIES = 10**6
DEFAULT_MAX_SCENARIOS = 10**5

DUMMY_ACTION = "participate"
DUMMY_SCENARIO = "close"

RELATIVE_REFERENCES = ("scenario-min", "min-ex-post")


class ARCError(Exception):
    pass


class ARCInputError(ARCError, ValueError):
    pass


class ARCDomainError(ARCInputError):
    pass


class ARCModelError(ARCError):
    pass


class PolicyIncompleteError(ARCModelError):
    pass


class EnumerationBudgetError(ARCError):
    def __init__(self, what: str, count: int, cap: int):
        super().__init__(f"{what}: {count} exceeds the enumeration cap of {cap}")
        self.count = count
        self.cap = cap


class StageOrder(enum.Enum):
    DECISION_FIRST = "decision-first"
    SCENARIO_FIRST = "scenario-first"


@dataclass(frozen=True)
class History:
    """Node of the interleaved tree: (x_{1:t}, w_{1:t})."""

    x_prefix: tuple = ()
    w_prefix: tuple = ()

    @property
    def stage(self) -> int:
        return len(self.x_prefix) + 1

    def act(self, x: Hashable) -> History:
        return History(self.x_prefix + (x,), self.w_prefix)

    def observe(self, w: Hashable) -> History:
        return History(self.x_prefix, self.w_prefix + (w,))

    def sort_key(self) -> tuple:
        return (len(self.x_prefix) + len(self.w_prefix), repr(self.x_prefix), repr(self.w_prefix))

    def __str__(self) -> str:
        return f"(x={list(self.x_prefix)}, w={list(self.w_prefix)})"


ROOT = History()


@dataclass(frozen=True)
class TreeProblem:
    """
    Finite multistage problem.

    `scenarios(t, w_prefix)` returns the stage scenario labels of stage t
    given the t-1 earlier stage scenarios. `actions(info)` returns the
    feasible stage actions at an information set: for DECISION_FIRST that is
    the stage-start history, for SCENARIO_FIRST the history after the stage
    scenario was observed. `reward(x, w)` is the total reward of a complete
    compatible pair.
    """

    T: int
    scenarios: Callable[[int, tuple], Sequence]
    actions: Callable[[History], Sequence]
    reward: Callable[[tuple, tuple], float]
    stage_order: StageOrder = StageOrder.DECISION_FIRST
    name: str = "problem"

    def __post_init__(self):
        if not isinstance(self.T, int) or self.T < 1:
            raise ARCInputError(f"stage count must be a positive integer, got {self.T!r}")

    def stage_scenarios(self, t: int, w_prefix: tuple, at: History | None = None) -> tuple:
        """`at` is the stage-start history, named in errors when the caller knows it."""
        labels = tuple(self.scenarios(t, tuple(w_prefix)))
        where = at if at is not None else f"after w={list(w_prefix)}"
        if not labels:
            raise ARCModelError(f"{self.name}: empty scenario set at stage {t}, history {where}")
        if len(set(labels)) != len(labels):
            raise ARCModelError(f"{self.name}: duplicate scenario labels at stage {t}, history {where}")
        return labels

    def stage_actions(self, info: History) -> tuple:
        labels = tuple(self.actions(info))
        if not labels:
            raise ARCModelError(f"{self.name}: empty action set at history {info}")
        if len(set(labels)) != len(labels):
            raise ARCModelError(f"{self.name}: duplicate action labels at history {info}")
        return labels

    def decision_point(self, history: History, w_t: Hashable) -> History:
        """Information set of the stage-t decision when w_t is the stage scenario."""
        if self.stage_order is StageOrder.DECISION_FIRST:
            return history
        return history.observe(w_t)

    def total_reward(self, x: tuple, w: tuple) -> float:
        value = float(self.reward(tuple(x), tuple(w)))
        if not math.isfinite(value):
            raise ARCModelError(f"{self.name}: non-finite reward {value} at x={list(x)}, w={list(w)}")
        return value

    def scenario_paths(self, limit: int | None = None) -> list[tuple]:
        paths: list[tuple] = []

        def walk(prefix: tuple):
            if len(prefix) == self.T:
                paths.append(prefix)
                if limit is not None and len(paths) > limit:
                    raise EnumerationBudgetError(f"{self.name}: scenario paths", len(paths), limit)
                return
            for w in self.stage_scenarios(len(prefix) + 1, prefix):
                walk(prefix + (w,))

        walk(())
        return paths

    def is_scenario_path(self, w: Sequence) -> bool:
        w = tuple(w)
        if len(w) != self.T:
            return False
        for t in range(1, self.T + 1):
            try:
                if w[t - 1] not in self.stage_scenarios(t, w[: t - 1]):
                    return False
            except TypeError:
                return False
        return True

    def action_sequences(self, w: tuple) -> Iterator[tuple]:
        """All action sequences compatible with scenario path w."""

        def walk(x_prefix: tuple) -> Iterator[tuple]:
            t = len(x_prefix) + 1
            if t > self.T:
                yield x_prefix
                return
            stage_start = History(x_prefix, w[: t - 1])
            for x in self.stage_actions(self.decision_point(stage_start, w[t - 1])):
                yield from walk(x_prefix + (x,))

        yield from walk(())

    def is_compatible(self, x: Sequence, w: Sequence) -> bool:
        x, w = tuple(x), tuple(w)
        if len(x) != self.T or not self.is_scenario_path(w):
            return False
        for t in range(1, self.T + 1):
            info = self.decision_point(History(x[: t - 1], w[: t - 1]), w[t - 1])
            if x[t - 1] not in self.stage_actions(info):
                return False
        return True


@dataclass(frozen=True)
class PolicyTable:
    """Deterministic policy: information set -> stage action."""

    decisions: Mapping[History, Hashable]

    def action(self, info: History) -> Hashable:
        try:
            return self.decisions[info]
        except KeyError:
            raise PolicyIncompleteError(f"policy has no decision at history {info}") from None

    @functools.cached_property
    def policy_id(self) -> str:
        items = sorted(((h.sort_key(), repr(a)) for h, a in self.decisions.items()))
        return hashlib.sha1(repr(items).encode("utf-8")).hexdigest()[:12]

    def __len__(self) -> int:
        return len(self.decisions)

    def __hash__(self) -> int:
        return hash(self.policy_id)

    def __eq__(self, other) -> bool:
        return isinstance(other, PolicyTable) and dict(self.decisions) == dict(other.decisions)


@dataclass(frozen=True)
class ArcValue:
    beta: float
    value: float
    policy: PolicyTable
    per_history_values: Mapping[History, float] = field(repr=False)


@dataclass(frozen=True)
class Reduction:
    """Non-dominated policies and scenarios with their reward profiles."""

    policies: list
    scenarios: list
    rewards: np.ndarray = field(repr=False)
    source: str = "problem"

    def as_problem(self) -> TreeProblem:
        return normal_form_problem(
            self.rewards,
            actions=[p.policy_id for p in self.policies],
            scenarios=self.scenarios,
            name=f"{self.source}/reduced",
        )


def _check_beta(beta: float) -> float:
    beta = float(beta)
    if not math.isfinite(beta) or beta < 0:
        raise ARCInputError(f"beta must be a finite nonnegative number, got {beta}")
    return beta


@functools.lru_cache(maxsize=1 << 16)
def _ex_post_cached(problem: TreeProblem, w: tuple) -> float:
    return max(problem.total_reward(x, w) for x in problem.action_sequences(w))


def ex_post_optimal(problem: TreeProblem, w: Sequence) -> float:
    """r*(w): best total reward over all action sequences compatible with w."""
    w = tuple(w)
    if not problem.is_scenario_path(w):
        raise ARCInputError(f"{problem.name}: {list(w)} is not a scenario path")
    return _ex_post_cached(problem, w)


def _leaf_regret(problem: TreeProblem, x: tuple, w: tuple, beta: float) -> float:
    return beta * _ex_post_cached(problem, w) - problem.total_reward(x, w)


def terminal_regret(problem: TreeProblem, x: Sequence, w: Sequence, beta: float) -> float:
    beta = _check_beta(beta)
    x, w = tuple(x), tuple(w)
    if not problem.is_compatible(x, w):
        raise ARCInputError(f"{problem.name}: x={list(x)} is not compatible with w={list(w)}")
    return _leaf_regret(problem, x, w, beta)


def solve_plain(problem: TreeProblem, beta: float) -> ArcValue:
    """
    Backward recursion D_{t-1}(h_t) over the whole tree.

    DECISION_FIRST: min over x_t of max over w_t.
    SCENARIO_FIRST: max over w_t of min over x_t.
    Ties go to the first label in declared order.
    """
    beta = _check_beta(beta)
    values: dict[History, float] = {}
    decisions: dict[History, Hashable] = {}
    decision_first = problem.stage_order is StageOrder.DECISION_FIRST

    def best_action(info: History, outcome: Callable[[Hashable], float]) -> float:
        best_value, best_x = math.inf, None
        for x in problem.stage_actions(info):
            v = outcome(x)
            if v < best_value:
                best_value, best_x = v, x
        decisions[info] = best_x
        return best_value

    def child_value(x_prefix: tuple, w_prefix: tuple) -> float:
        # leaves are scored in place, no History is built for them
        if len(x_prefix) == problem.T:
            return _leaf_regret(problem, x_prefix, w_prefix, beta)
        return stage_value(History(x_prefix, w_prefix))

    def stage_value(h: History) -> float:
        w_labels = problem.stage_scenarios(h.stage, h.w_prefix, h)
        if decision_first:
            value = best_action(h, lambda x: max(child_value(h.x_prefix + (x,), h.w_prefix + (w,)) for w in w_labels))
        else:
            value = -math.inf
            for w in w_labels:
                info = h.observe(w)
                v = best_action(info, lambda x: child_value(info.x_prefix + (x,), info.w_prefix))
                if v > value:
                    value = v
        values[h] = value
        return value

    value = stage_value(ROOT)
    logger.debug("%s: D(%g) = %.12g over %d histories", problem.name, beta, value, len(values))
    return ArcValue(beta=beta, value=value, policy=PolicyTable(decisions), per_history_values=values)


def play_policy(problem: TreeProblem, policy: PolicyTable, w: Sequence) -> tuple:
    """Action sequence pi(w) the policy produces along scenario path w."""
    w = tuple(w)
    x: tuple = ()
    for t in range(1, problem.T + 1):
        info = problem.decision_point(History(x, w[: t - 1]), w[t - 1])
        a = policy.action(info)
        if a not in problem.stage_actions(info):
            raise PolicyIncompleteError(f"policy action {a!r} is infeasible at history {info}")
        x = x + (a,)
    return x


def ex_post_vector(problem: TreeProblem, paths: Sequence[tuple]) -> np.ndarray:
    return np.array([_ex_post_cached(problem, tuple(w)) for w in paths], dtype=float)


def reward_profiles(problem: TreeProblem, policies: Sequence[PolicyTable], paths: Sequence[tuple]) -> np.ndarray:
    """Matrix of r^pi(w): one row per policy, one column per scenario path."""
    rows = np.empty((len(policies), len(paths)), dtype=float)
    for i, policy in enumerate(policies):
        for k, w in enumerate(paths):
            rows[i, k] = problem.total_reward(play_policy(problem, policy, w), w)
    return rows


def evaluate_policy(problem: TreeProblem, policy: PolicyTable, beta: float, history: History = ROOT) -> float:
    """
    D^pi_{t-1}(h_t): worst regret of following `policy` from `history` on.

    At the root the recursive value is cross-checked against the flat form
    max over w of beta * r*(w) - r^pi(w).
    """
    beta = _check_beta(beta)

    def policy_value(h: History) -> float:
        t = h.stage
        if t > problem.T:
            return _leaf_regret(problem, h.x_prefix, h.w_prefix, beta)
        worst = -math.inf
        for w in problem.stage_scenarios(t, h.w_prefix, h):
            info = problem.decision_point(h, w)
            a = policy.action(info)
            if a not in problem.stage_actions(info):
                raise PolicyIncompleteError(f"policy action {a!r} is infeasible at history {info}")
            v = policy_value(h.act(a).observe(w))
            if v > worst:
                worst = v
        return worst

    value = policy_value(history)
    if history == ROOT:
        paths = problem.scenario_paths()
        flat = max(_leaf_regret(problem, play_policy(problem, policy, w), w, beta) for w in paths)
        if abs(flat - value) > VALUE_ATOL:
            raise ARCModelError(f"{problem.name}: recursive policy regret {value} differs from flat form {flat}")
    return value


def scenario_minimum(problem: TreeProblem, w: Sequence) -> float:
    """min over compatible x of r(x, w)."""
    w = tuple(w)
    return min(problem.total_reward(x, w) for x in problem.action_sequences(w))


def relative_reward_transform(problem: TreeProblem, f: Callable[[tuple], float] | str) -> TreeProblem:
    """Problem with reward r(x, w) - f(w); `f` may name a built-in reference."""
    paths = problem.scenario_paths()
    if f == "scenario-min":
        shift = {w: scenario_minimum(problem, w) for w in paths}
    elif f == "min-ex-post":
        floor = min(_ex_post_cached(problem, w) for w in paths)
        shift = {w: floor for w in paths}
    elif callable(f):
        shift = {w: float(f(w)) for w in paths}
    else:
        raise ARCInputError(f"unknown reference {f!r}; expected a callable or one of {RELATIVE_REFERENCES}")
    for w, s in shift.items():
        if not math.isfinite(s):
            raise ARCInputError(f"reference value {s} is not finite at scenario {list(w)}")

    base_reward = problem.reward

    def relative_reward(x: tuple, w: tuple) -> float:
        return base_reward(x, w) - shift[w]

    return dataclasses.replace(problem, reward=relative_reward, name=f"{problem.name}+relative")


def as_decision_first(problem: TreeProblem) -> TreeProblem:
    """
    Rewrite a SCENARIO_FIRST problem in the standard order: a single-choice
    dummy decision opens the game and a single dummy scenario closes it.
    """
    if problem.stage_order is StageOrder.DECISION_FIRST:
        return problem
    T = problem.T

    def scenarios(t: int, w_prefix: tuple) -> tuple:
        return problem.stage_scenarios(t, w_prefix) if t <= T else (DUMMY_SCENARIO,)

    def actions(info: History) -> tuple:
        if info.stage == 1:
            return (DUMMY_ACTION,)
        return problem.stage_actions(History(info.x_prefix[1:], info.w_prefix))

    def reward(x: tuple, w: tuple) -> float:
        return problem.reward(x[1:], w[:T])

    return TreeProblem(T + 1, scenarios, actions, reward, StageOrder.DECISION_FIRST, name=f"{problem.name}/decision-first")


def normal_form_problem(rewards, actions: Sequence | None = None, scenarios: Sequence | None = None, name: str = "matrix") -> TreeProblem:
    """One-stage DECISION_FIRST problem: rows are actions, columns scenarios."""
    table = np.asarray(rewards, dtype=float)
    if table.ndim != 2 or table.size == 0:
        raise ARCInputError(f"{name}: reward matrix must be a nonempty 2-d table")
    if not np.all(np.isfinite(table)):
        raise ARCInputError(f"{name}: reward matrix has non-finite entries")
    n_rows, n_cols = table.shape
    row_labels = tuple(actions) if actions is not None else tuple(range(1, n_rows + 1))
    col_labels = tuple(scenarios) if scenarios is not None else tuple(range(1, n_cols + 1))
    if len(row_labels) != n_rows or len(col_labels) != n_cols:
        raise ARCInputError(f"{name}: label counts do not match a {n_rows}x{n_cols} matrix")
    row_index = {a: i for i, a in enumerate(row_labels)}
    col_index = {w: k for k, w in enumerate(col_labels)}
    entries = table.tolist()

    def reward(x: tuple, w: tuple) -> float:
        return entries[row_index[x[0]]][col_index[w[0]]]

    return TreeProblem(1, lambda t, w_prefix: col_labels, lambda info: row_labels, reward, StageOrder.DECISION_FIRST, name=name)


def count_policies(problem: TreeProblem) -> int:
    def count(h: History) -> int:
        t = h.stage
        if t > problem.T:
            return 1
        w_labels = problem.stage_scenarios(t, h.w_prefix, h)
        if problem.stage_order is StageOrder.DECISION_FIRST:
            return sum(math.prod(count(h.act(x).observe(w)) for w in w_labels) for x in problem.stage_actions(h))
        return math.prod(
            sum(count(h.observe(w).act(x)) for x in problem.stage_actions(h.observe(w))) for w in w_labels
        )

    return count(ROOT)


def enumerate_policies(problem: TreeProblem, max_policies: int = DEFAULT_MAX_POLICIES) -> list[PolicyTable]:
    """
    Every deterministic policy, defined on the histories it can reach.
    The root decision varies slowest, then earlier branches before later ones.
    """
    total = count_policies(problem)
    if total > max_policies:
        raise EnumerationBudgetError(f"{problem.name}: policies", total, max_policies)
    logger.info("%s: enumerating %d policies", problem.name, total)

    def merged(info: History, x: Hashable, parts: Sequence[dict]) -> dict:
        out = {info: x}
        for part in parts:
            out.update(part)
        return out

    def fragments(h: History) -> list[dict]:
        t = h.stage
        if t > problem.T:
            return [{}]
        w_labels = problem.stage_scenarios(t, h.w_prefix, h)
        if problem.stage_order is StageOrder.DECISION_FIRST:
            out = []
            for x in problem.stage_actions(h):
                branches = [fragments(h.act(x).observe(w)) for w in w_labels]
                out.extend(merged(h, x, combo) for combo in itertools.product(*branches))
            return out
        per_scenario = []
        for w in w_labels:
            info = h.observe(w)
            per_scenario.append(
                [merged(info, x, [frag]) for x in problem.stage_actions(info) for frag in fragments(info.act(x))]
            )
        return [merged_all(combo) for combo in itertools.product(*per_scenario)]

    def merged_all(parts: Sequence[dict]) -> dict:
        out: dict = {}
        for part in parts:
            out.update(part)
        return out

    return [PolicyTable(d) for d in fragments(ROOT)]


def maximal_rows(matrix: np.ndarray) -> list[int]:
    """Rows not weakly dominated by another row; equal rows keep the lowest index."""
    matrix = np.asarray(matrix, dtype=float)
    n = len(matrix)
    index = np.arange(n)
    keep = []
    for i in range(n):
        at_least = np.all(matrix >= matrix[i], axis=1)
        better = np.any(matrix > matrix[i], axis=1)
        dominators = at_least & (better | (index < i)) & (index != i)
        if not dominators.any():
            keep.append(i)
    return keep


def eliminate_dominated(problem: TreeProblem, max_policies: int = DEFAULT_MAX_POLICIES) -> Reduction:
    """
    Drop dominated policies, then scenarios the adversary never needs.

    A scenario w' goes when a kept scenario w has r*(w) >= r*(w') and
    r^pi(w) <= r^pi(w') for every kept policy, so every regret
    beta * r* - r^pi at w is at least the one at w' for all beta >= 0.
    """
    policies = enumerate_policies(problem, max_policies)
    paths = problem.scenario_paths()
    profiles = reward_profiles(problem, policies, paths)
    kept_rows = maximal_rows(profiles)
    reduced = profiles[kept_rows]

    star = ex_post_vector(problem, paths)
    adversary_view = np.column_stack([star, -reduced.T])
    kept_cols = maximal_rows(adversary_view)

    logger.info(
        "%s: kept %d of %d policies and %d of %d scenarios",
        problem.name, len(kept_rows), len(policies), len(kept_cols), len(paths),
    )
    return Reduction(
        policies=[policies[i] for i in kept_rows],
        scenarios=[paths[k] for k in kept_cols],
        rewards=reduced[:, kept_cols],
        source=problem.name,
    )
