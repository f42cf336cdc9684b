"""
One-way trading under the adjustable regret criterion.

One divisible unit is sold over T periods at prices in [m, M]. The trader
sees p_t before choosing how much to sell; the benchmark is beta times the
highest price of the path. Everything here is closed form.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import pandas as pd

from BackEnd_01_ARC_Core import ARCDomainError, ARCInputError
from BackEnd_02_ARC_Analysis import (
    DEFAULT_TOLERANCE,
    CrResult,
    CurveSample,
    RegretCurve,
    ratio_root,
)

logger = logging.getLogger(__name__)

PRICE_ATOL = 1e-12
GUARANTEE_ATOL = 1e-9
ADVERSARY_TOL = 1e-6
DEFAULT_SEED = 42

TRACE_COLUMNS = ["t", "price", "sold", "remaining", "revenue", "pmax"]
CLOSED_FORM_POLICY = "closed-form"


@dataclass(frozen=True)
class MarketSpec:
    m: float
    M: float
    T: int

    def __post_init__(self):
        if not (math.isfinite(self.m) and math.isfinite(self.M)) or not 0 < self.m <= self.M:
            raise ARCInputError(f"market needs 0 < m <= M, got m={self.m}, M={self.M}")
        if not isinstance(self.T, (int, np.integer)) or self.T < 1:
            raise ARCInputError(f"market needs a positive integer period count, got T={self.T!r}")

    @property
    def flat(self) -> bool:
        return self.M == self.m

    def label(self) -> str:
        return f"oneway m={self.m:g} M={self.M:g} T={self.T}"


@dataclass(frozen=True)
class TradingState:
    """Start of period t: q unsold, r earned so far, pmax the highest price seen."""

    t: int
    q: float
    r: float
    pmax: float

    @classmethod
    def initial(cls, spec: MarketSpec) -> TradingState:
        return cls(t=1, q=1.0, r=0.0, pmax=spec.m)

    def check(self, spec: MarketSpec) -> TradingState:
        if not 1 <= self.t <= spec.T + 1:
            raise ARCInputError(f"period {self.t} outside 1..{spec.T + 1}")
        if not -PRICE_ATOL <= self.q <= 1 + PRICE_ATOL:
            raise ARCInputError(f"remaining quantity {self.q} outside [0, 1]")
        if not spec.m - PRICE_ATOL <= self.pmax <= spec.M + PRICE_ATOL:
            raise ARCInputError(f"running max price {self.pmax} outside [{spec.m}, {spec.M}]")
        if self.r < -PRICE_ATOL or self.r > self.pmax * (1 - self.q) + 1e-9:
            raise ARCInputError(f"revenue {self.r} inconsistent with q={self.q}, pmax={self.pmax}")
        return self


def floor_revenue(state: TradingState, spec: MarketSpec) -> float:
    """R_t = r_t + m q_t, the revenue already secured."""
    return state.r + spec.m * state.q


def _require_positive_beta(beta: float) -> float:
    beta = float(beta)
    if not math.isfinite(beta) or beta < 0:
        raise ARCInputError(f"beta must be a finite nonnegative number, got {beta}")
    if beta == 0:
        raise ARCDomainError("closed forms need beta > 0; solve a discretization for beta = 0")
    return beta


def _check_price(p: float, spec: MarketSpec, where: str = "price") -> float:
    p = float(p)
    if not spec.m - PRICE_ATOL <= p <= spec.M + PRICE_ATOL:
        raise ARCInputError(f"{where} {p} outside [{spec.m}, {spec.M}]")
    return min(max(p, spec.m), spec.M)


def _int_power(base: float, j: int) -> float:
    out = 1.0
    for _ in range(j):
        out *= base
    return out


def aux_price(j: int, q: float, beta: float, spec: MarketSpec) -> float:
    """P_j(q) = (M - m) * max(0, 1 - q / (beta j))^j + m."""
    beta = _require_positive_beta(beta)
    if j < 1:
        raise ARCInputError(f"auxiliary price index must be >= 1, got {j}")
    if not -PRICE_ATOL <= q <= 1 + PRICE_ATOL:
        raise ARCInputError(f"quantity {q} outside [0, 1]")
    base = max(0.0, 1.0 - max(q, 0.0) / (beta * j))
    return (spec.M - spec.m) * _int_power(base, j) + spec.m


def aux_price_inverse(n: int, y: float, beta: float, spec: MarketSpec) -> float:
    """Quantity q in [0, beta n] with P_n(q) = y; 0 in a flat market."""
    beta = _require_positive_beta(beta)
    if n < 1:
        raise ARCInputError(f"auxiliary price index must be >= 1, got {n}")
    y = _check_price(y, spec)
    if spec.flat:
        return 0.0
    level = (y - spec.m) / (spec.M - spec.m)
    q = beta * n * (1.0 - level ** (1.0 / n))
    return min(max(q, 0.0), beta * n)


def stage_guarantee(state: TradingState, beta: float, spec: MarketSpec) -> float:
    """D_{t-1}(h_t) = beta * max(pmax, P_{1+T-t}(q)) - (r + m q)."""
    beta = _require_positive_beta(beta)
    state.check(spec)
    if state.t > spec.T:
        raise ARCInputError(f"no guarantee after the last period (t={state.t})")
    n = 1 + spec.T - state.t
    return beta * max(state.pmax, aux_price(n, state.q, beta, spec)) - floor_revenue(state, spec)


def policy_step(state: TradingState, price: float, beta: float, spec: MarketSpec) -> tuple[float, TradingState]:
    beta = _require_positive_beta(beta)
    state.check(spec)
    if state.t > spec.T:
        raise ARCInputError(f"trading is over after period {spec.T}")
    price = _check_price(price, spec, where=f"price at t={state.t}")
    pmax = max(state.pmax, price)

    if state.t == spec.T:
        keep = 0.0
    elif spec.flat:
        keep = state.q
    else:
        keep = min(state.q, aux_price_inverse(spec.T - state.t, pmax, beta, spec))
    sold = state.q - keep
    return sold, TradingState(t=state.t + 1, q=keep, r=state.r + price * sold, pmax=pmax)


def overall_guarantee(beta: float, spec: MarketSpec) -> float:
    """D(beta) = beta (M - m) max(0, 1 - 1/(beta T))^T - (1 - beta) m, and D(0) = -m."""
    beta = float(beta)
    if not math.isfinite(beta) or beta < 0:
        raise ARCInputError(f"beta must be a finite nonnegative number, got {beta}")
    if beta == 0:
        return -spec.m
    base = max(0.0, 1.0 - 1.0 / (beta * spec.T))
    return beta * (spec.M - spec.m) * _int_power(base, spec.T) - (1.0 - beta) * spec.m


def _play(state: TradingState, prices: Sequence[float], beta: float, spec: MarketSpec) -> tuple[TradingState, list[tuple]]:
    rows = []
    for price in prices:
        t = state.t
        sold, state = policy_step(state, price, beta, spec)
        rows.append((t, float(price), sold, state.q, state.r, state.pmax))
    return state, rows


def replay(state: TradingState, prices: Sequence[float], beta: float, spec: MarketSpec) -> float:
    """Realized regret of following the policy from `state` along the remaining prices."""
    state.check(spec)
    if len(prices) != spec.T - state.t + 1:
        raise ARCInputError(f"expected {spec.T - state.t + 1} prices from period {state.t}, got {len(prices)}")
    final, _ = _play(state, prices, beta, spec)
    return beta * final.pmax - final.r


@dataclass(frozen=True)
class SimulationResult:
    revenue: float
    regret: float
    guarantee: float
    within_guarantee: bool
    trace: pd.DataFrame


def simulate(path: Sequence[float], beta: float, spec: MarketSpec) -> SimulationResult:
    beta = _require_positive_beta(beta)
    path = [float(p) for p in path]
    if len(path) != spec.T:
        raise ARCInputError(f"price path has {len(path)} prices, market has T={spec.T}")
    final, rows = _play(TradingState.initial(spec), path, beta, spec)

    regret = beta * max(path) - final.r
    guarantee = overall_guarantee(beta, spec)
    within = regret <= guarantee + GUARANTEE_ATOL
    if not within:
        logger.warning("%s: path %s realizes regret %.12g above guarantee %.12g", spec.label(), path, regret, guarantee)
    trace = pd.DataFrame(rows, columns=TRACE_COLUMNS)
    return SimulationResult(final.r, regret, guarantee, within, trace)


def worst_case_path(beta: float, spec: MarketSpec, from_state: TradingState | None = None) -> list[float]:
    """
    Equalizing adversary. Before the last period the price is either the
    floor m or the level P_n(z*) with z* = n q / (n + 1), whichever leaves
    the larger guarantee; the floor wins ties. In the last period one of the
    endpoints m, M is optimal.
    """
    beta = _require_positive_beta(beta)
    state = (from_state or TradingState.initial(spec)).check(spec)
    path: list[float] = []
    while state.t <= spec.T:
        if state.t == spec.T:
            low = beta * max(state.pmax, spec.m) - (state.r + spec.m * state.q)
            high = beta * spec.M - (state.r + spec.M * state.q)
            price = spec.M if high > low else spec.m
        else:
            n = spec.T - state.t
            z_star = n * state.q / (n + 1)
            candidates = [spec.m, aux_price(n, z_star, beta, spec)]
            values = [stage_guarantee(policy_step(state, p, beta, spec)[1], beta, spec) for p in candidates]
            price = candidates[1] if values[1] > values[0] else candidates[0]
        path.append(price)
        state = policy_step(state, price, beta, spec)[1]
    return path


def random_paths(spec: MarketSpec, count: int, seed: int = DEFAULT_SEED) -> np.ndarray:
    if count < 1:
        raise ARCInputError(f"path count must be positive, got {count}")
    rng = np.random.default_rng(seed)
    return rng.uniform(spec.m, spec.M, size=(count, spec.T))


def closed_form_curve(spec: MarketSpec, betas: Sequence[float]) -> RegretCurve:
    samples = tuple(CurveSample(float(b), overall_guarantee(b, spec), CLOSED_FORM_POLICY) for b in betas)
    return RegretCurve(samples, spec.label())


def closed_form_ratio(spec: MarketSpec, tol: float = DEFAULT_TOLERANCE) -> CrResult:
    return ratio_root(lambda beta: overall_guarantee(beta, spec), tol=tol, label=spec.label())


def policy_snapshot(spec: MarketSpec, beta: float, prices: Sequence[float] | None = None, points: int = 11) -> pd.DataFrame:
    """First-period sale as a function of the first price."""
    if prices is None:
        prices = np.linspace(spec.m, spec.M, points)
    start = TradingState.initial(spec)
    rows = []
    for price in prices:
        sold, after = policy_step(start, price, beta, spec)
        rows.append((float(price), sold, after.q, stage_guarantee(after, beta, spec) if after.t <= spec.T else beta * after.pmax - after.r))
    return pd.DataFrame(rows, columns=["price", "sold", "remaining", "guarantee_after"])

