"""
One-way trading as a finite ScenarioFirst tree.

Prices come from an evenly spaced grid on [m, M]; the unit is split into
`alloc` lots and each action is the whole number of lots sold in a period.
Whatever is left is sold in the last period.
"""

import logging

import numpy as np

from BackEnd_01_ARC_Core import ARCInputError, History, StageOrder, TreeProblem
from BackEnd_03_OneWay_Trading import MarketSpec

logger = logging.getLogger(__name__)

DEFAULT_PRICE_POINTS = 3
DEFAULT_ALLOC_LOTS = 4

# Instances used by the builtin corpus.
ONEWAY_CORPUS = {
    "oneway-1-2": (MarketSpec(1.0, 2.0, 2), 3, 4),
    "oneway-1-3": (MarketSpec(1.0, 3.0, 2), 3, 2),
}


def price_grid(spec: MarketSpec, points: int) -> tuple:
    if points < 1 or (points == 1 and not spec.flat):
        raise ARCInputError(f"price grid needs at least 2 points on [{spec.m}, {spec.M}], got {points}")
    return tuple(float(p) for p in np.linspace(spec.m, spec.M, points))


def OneWay_Problem(spec: MarketSpec, prices: int = DEFAULT_PRICE_POINTS, alloc: int = DEFAULT_ALLOC_LOTS) -> TreeProblem:
    if alloc < 1:
        raise ARCInputError(f"allocation grid needs at least 1 lot, got {alloc}")
    grid = price_grid(spec, prices)
    T = spec.T

    def scenarios(t: int, w_prefix: tuple) -> tuple:
        return grid

    def actions(info: History) -> tuple:
        left = alloc - sum(info.x_prefix)
        if info.stage == T:
            return (left,)
        return tuple(range(left + 1))

    def reward(x: tuple, w: tuple) -> float:
        return sum(p * k for p, k in zip(w, x)) / alloc

    logger.debug("%s: %d prices, %d lots", spec.label(), len(grid), alloc)
    return TreeProblem(
        T, scenarios, actions, reward, StageOrder.SCENARIO_FIRST,
        name=f"{spec.label()} prices={prices} alloc={alloc}",
    )


def OneWay_Corpus_Problem(name: str) -> TreeProblem:
    spec, prices, alloc = ONEWAY_CORPUS[name]
    return OneWay_Problem(spec, prices, alloc)
