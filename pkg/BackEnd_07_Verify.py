"""
Verification suites over the builtin corpus.

Each suite yields CheckResult rows; a failing or crashing check is
reported, never raised.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, Sequence

import numpy as np

from BackEnd_01_ARC_Core import (
    VALUE_ATOL,
    ARCError,
    ARCInputError,
    StageOrder,
    as_decision_first,
    eliminate_dominated,
    evaluate_policy,
    ex_post_vector,
    solve_plain,
)
from BackEnd_02_ARC_Analysis import (
    Solver,
    competitive_ratio,
    convexity_check,
    cr_policy_set_check,
    is_strictly_increasing,
    regret_curve,
    slope_bounds_check,
)
from BackEnd_03_OneWay_Trading import (
    ADVERSARY_TOL,
    DEFAULT_SEED,
    GUARANTEE_ATOL,
    TradingState,
    closed_form_curve,
    random_paths,
    replay,
    stage_guarantee,
    worst_case_path,
)
from BackEnd_04_Oracle import brute_force_cr, brute_force_maximin, brute_force_minimax
from BackEnd_05_Problems import LoadedProblem, builtin_names, builtin_problem
from BackEnd_06_Reports import check_line, fmt

logger = logging.getLogger(__name__)

VERIFY_BETAS = (0.0, 0.25, 0.5, 2 / 3, 1.0, 1.5)
CR_AGREEMENT_TOL = 1e-6
CONVEXITY_GRID = np.linspace(0.05, 3.0, 200)
TIGHTNESS_PATHS = 200


@dataclass(frozen=True)
class CheckResult:
    suite: str
    subject: str
    passed: bool
    detail: str

    def line(self) -> str:
        return check_line(self.passed, self.suite, f"{self.subject} {self.detail}")


def default_corpus() -> list[LoadedProblem]:
    return [builtin_problem(name) for name in builtin_names()]


def _all_positive_star(item: LoadedProblem) -> bool:
    problem = item.problem
    return bool(np.all(ex_post_vector(problem, problem.scenario_paths()) > 0))


def oracle_suite(corpus: Sequence[LoadedProblem], solver: Solver) -> Iterator[CheckResult]:
    for item in corpus:
        for beta in VERIFY_BETAS:
            engine = solver(item.problem, beta).value
            oracle, _ = brute_force_minimax(item.problem, beta)
            yield CheckResult(
                "oracle", item.name, abs(engine - oracle) <= VALUE_ATOL,
                f"beta={fmt(beta)} engine={fmt(engine)} oracle={fmt(oracle)}",
            )
        maximin = brute_force_maximin(item.problem)
        at_zero = solver(item.problem, 0.0).value
        yield CheckResult(
            "oracle", item.name, abs(maximin + at_zero) <= VALUE_ATOL,
            f"maximin={fmt(maximin)} -D(0)={fmt(-at_zero)}",
        )


def correspondence_suite(corpus: Sequence[LoadedProblem], solver: Solver) -> Iterator[CheckResult]:
    for item in corpus:
        for beta in VERIFY_BETAS:
            result = solver(item.problem, beta)
            evaluated = evaluate_policy(item.problem, result.policy, beta)
            yield CheckResult(
                "correspondence", item.name, abs(evaluated - result.value) <= VALUE_ATOL,
                f"beta={fmt(beta)} D={fmt(result.value)} D^pi={fmt(evaluated)}",
            )
            if item.problem.stage_order is StageOrder.SCENARIO_FIRST:
                standard = solver(as_decision_first(item.problem), beta).value
                yield CheckResult(
                    "correspondence", item.name, abs(standard - result.value) <= VALUE_ATOL,
                    f"beta={fmt(beta)} stage order: scenario-first={fmt(result.value)} decision-first={fmt(standard)}",
                )


def slope_suite(corpus: Sequence[LoadedProblem], solver: Solver) -> Iterator[CheckResult]:
    for item in corpus:
        for beta1, beta2 in itertools.combinations(VERIFY_BETAS, 2):
            w = slope_bounds_check(item.problem, beta1, beta2, solver)
            yield CheckResult(
                "slope", item.name, w.holds,
                f"[{fmt(beta1)}, {fmt(beta2)}] {fmt(w.r_star_12)} <= {fmt(w.quotient)} <= {fmt(w.r_star_21)}",
            )


def convexity_suite(corpus: Sequence[LoadedProblem], solver: Solver) -> Iterator[CheckResult]:
    markets = {item.market for item in corpus if item.market is not None}
    for spec in sorted(markets, key=lambda s: (s.m, s.M, s.T)):
        curve = closed_form_curve(spec, CONVEXITY_GRID)
        yield CheckResult("convexity", spec.label(), convexity_check(curve), f"closed form on {len(CONVEXITY_GRID)} betas")


def cr_suite(corpus: Sequence[LoadedProblem], solver: Solver) -> Iterator[CheckResult]:
    for item in corpus:
        result = competitive_ratio(item.problem, solver=solver)
        if result.degenerate:
            maximin = brute_force_maximin(item.problem)
            yield CheckResult(
                "cr", item.name, maximin <= VALUE_ATOL,
                f"degenerate, D(0)={fmt(result.d_zero)} maximin={fmt(maximin)}",
            )
            continue
        if not _all_positive_star(item):
            yield CheckResult("cr", item.name, True, f"beta0={fmt(result.beta0)}, ratio undefined (r* <= 0)")
            continue
        oracle = brute_force_cr(item.problem)
        yield CheckResult(
            "cr", item.name, abs(oracle - result.beta0) <= CR_AGREEMENT_TOL,
            f"beta0={fmt(result.beta0)} oracle={fmt(oracle)}",
        )
        yield CheckResult("cr", item.name, cr_policy_set_check(item.problem), "optimal policy sets agree")


def elimination_suite(corpus: Sequence[LoadedProblem], solver: Solver) -> Iterator[CheckResult]:
    for item in corpus:
        reduction = eliminate_dominated(item.problem)
        reduced = reduction.as_problem()
        for beta in VERIFY_BETAS:
            before = solver(item.problem, beta).value
            after = solver(reduced, beta).value
            yield CheckResult(
                "elimination", item.name, abs(before - after) <= VALUE_ATOL,
                f"beta={fmt(beta)} kept {len(reduction.policies)}x{len(reduction.scenarios)} "
                f"D={fmt(before)} reduced={fmt(after)}",
            )


def monotone_suite(corpus: Sequence[LoadedProblem], solver: Solver) -> Iterator[CheckResult]:
    for item in corpus:
        if not _all_positive_star(item):
            continue
        curve = regret_curve(item.problem, VERIFY_BETAS, solver)
        yield CheckResult("monotone", item.name, is_strictly_increasing(curve), "D strictly increasing on verify betas")


def tightness_suite(corpus: Sequence[LoadedProblem], solver: Solver) -> Iterator[CheckResult]:
    markets = {item.market for item in corpus if item.market is not None}
    for spec in sorted(markets, key=lambda s: (s.m, s.M, s.T)):
        start = TradingState.initial(spec)
        for beta in (b for b in VERIFY_BETAS if b > 0):
            guarantee = stage_guarantee(start, beta, spec)
            realized = replay(start, worst_case_path(beta, spec), beta, spec)
            yield CheckResult(
                "tightness", spec.label(), abs(realized - guarantee) <= ADVERSARY_TOL,
                f"beta={fmt(beta)} adversary={fmt(realized)} guarantee={fmt(guarantee)}",
            )
            worst = max(replay(start, list(p), beta, spec) for p in random_paths(spec, TIGHTNESS_PATHS, DEFAULT_SEED))
            yield CheckResult(
                "tightness", spec.label(), worst <= guarantee + GUARANTEE_ATOL,
                f"beta={fmt(beta)} worst of {TIGHTNESS_PATHS} random paths={fmt(worst)}",
            )


SUITES: dict[str, Callable[[Sequence[LoadedProblem], Solver], Iterable[CheckResult]]] = {
    "oracle": oracle_suite,
    "correspondence": correspondence_suite,
    "slope": slope_suite,
    "convexity": convexity_suite,
    "cr": cr_suite,
    "elimination": elimination_suite,
    "monotone": monotone_suite,
    "tightness": tightness_suite,
}


def run_verification(
    corpus: Sequence[LoadedProblem] | None = None,
    only: Iterable[str] | None = None,
    solver: Solver = solve_plain,
) -> list[CheckResult]:
    corpus = default_corpus() if corpus is None else list(corpus)
    selected = list(SUITES) if not only else list(only)
    unknown = [s for s in selected if s not in SUITES]
    if unknown:
        raise ARCInputError(f"unknown suites {unknown}; known: {list(SUITES)}")

    results: list[CheckResult] = []
    for suite in selected:
        try:
            for result in SUITES[suite](corpus, solver):
                results.append(result)
        except (ARCError, ArithmeticError) as err:
            results.append(CheckResult(suite, "suite", False, f"aborted: {err}"))
    failed = [r for r in results if not r.passed]
    for r in failed:
        logger.warning(r.line())
    logger.info("verification: %d checks, %d failed", len(results), len(failed))
    return results
