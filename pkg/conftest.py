import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from BackEnd_01_ARC_Core import normal_form_problem  # noqa: E402
from BackEnd_03_OneWay_Trading import MarketSpec  # noqa: E402
from BackEnd_05_Problem_Library.BackEnd_05_Problem_Capacity import Capacity_Problem  # noqa: E402
from BackEnd_05_Problem_Library.BackEnd_05_Problem_OneWay import OneWay_Problem  # noqa: E402


@pytest.fixture
def classic():
    return normal_form_problem([[3, 1], [2, 2]], name="classic")


@pytest.fixture
def identity():
    return normal_form_problem([[1, 0], [0, 1]], name="identity")


@pytest.fixture
def market():
    return MarketSpec(1.0, 2.0, 2)


@pytest.fixture
def oneway_small(market):
    return OneWay_Problem(market, 3, 4)


@pytest.fixture
def capacity():
    return Capacity_Problem()
