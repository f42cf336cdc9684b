"""
Two-stage capacity build against uncertain demand.

Stage 1 commits x1 in {0, 1, 2} units at cost 1 each, then demand is
revealed as low (1) or high (2). Stage 2 adds x2 in {0, 1} at cost 1.5;
after a high first signal a rush may add one more unit of demand. Each
unit served earns 2.
"""

from BackEnd_01_ARC_Core import History, StageOrder, TreeProblem

FIRST_BUILD = (0, 1, 2)
SECOND_BUILD = (0, 1)
DEMAND = {"low": 1, "high": 2}
FOLLOW_UP = {"low": ("calm",), "high": ("calm", "rush")}

UNIT_PRICE = 2.0
FIRST_COST = 1.0
SECOND_COST = 1.5


def _scenarios(t: int, w_prefix: tuple) -> tuple:
    if t == 1:
        return tuple(DEMAND)
    return FOLLOW_UP[w_prefix[0]]


def _actions(info: History) -> tuple:
    return FIRST_BUILD if info.stage == 1 else SECOND_BUILD


def _reward(x: tuple, w: tuple) -> float:
    demand = DEMAND[w[0]] + (1 if w[1] == "rush" else 0)
    built = x[0] + x[1]
    return UNIT_PRICE * min(built, demand) - FIRST_COST * x[0] - SECOND_COST * x[1]


def Capacity_Problem() -> TreeProblem:
    return TreeProblem(2, _scenarios, _actions, _reward, StageOrder.DECISION_FIRST, name="capacity")
