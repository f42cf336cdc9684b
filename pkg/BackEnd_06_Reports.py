"""
Flat-file input and output: curve and trace CSVs, plot data, price paths,
and the fixed-precision text used in reports.
"""

from __future__ import annotations

import logging
import math
from pathlib import Path

import pandas as pd

from BackEnd_01_ARC_Core import ARCInputError
from BackEnd_02_ARC_Analysis import CURVE_COLUMNS, CrResult, RegretCurve
from BackEnd_03_OneWay_Trading import TRACE_COLUMNS, MarketSpec, SimulationResult

logger = logging.getLogger(__name__)

REPORT_DECIMALS = 6


def fmt(value: float) -> str:
    return f"{value:.{REPORT_DECIMALS}f}"


def plot_data_path(csv_path: Path | str) -> Path:
    return Path(csv_path).with_suffix(".dat")


def write_curve_csv(curve: RegretCurve, path: Path | str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    curve.to_frame().to_csv(path, index=False, lineterminator="\n")
    logger.info("wrote %d curve rows to %s", len(curve.samples), path)
    return path


def read_curve_csv(path: Path | str) -> RegretCurve:
    path = Path(path)
    frame = pd.read_csv(path, dtype={"policy_id": str}, keep_default_na=False, float_precision="round_trip")
    if list(frame.columns) != CURVE_COLUMNS:
        raise ARCInputError(f"{path}: expected header {','.join(CURVE_COLUMNS)}, got {','.join(frame.columns)}")
    return RegretCurve.from_frame(frame, path.stem)


def write_plot_data(curve: RegretCurve, path: Path | str) -> Path:
    """Two columns, beta and value, space separated, no header."""
    path = Path(path)
    frame = curve.to_frame()[["beta", "value"]]
    frame.to_csv(path, sep=" ", header=False, index=False, lineterminator="\n", float_format=lambda v: repr(float(v)))
    return path


def write_trace_csv(result: SimulationResult, path: Path | str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    result.trace.to_csv(path, index=False, lineterminator="\n")
    return path


def read_trace_csv(path: Path | str) -> pd.DataFrame:
    frame = pd.read_csv(path, float_precision="round_trip")
    if list(frame.columns) != TRACE_COLUMNS:
        raise ARCInputError(f"{path}: expected header {','.join(TRACE_COLUMNS)}")
    return frame


def read_price_path(path: Path | str, spec: MarketSpec) -> list[float]:
    """One price per line, exactly T lines, each inside [m, M]."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    while lines and not lines[-1].strip():
        lines.pop()
    prices = []
    for number, raw in enumerate(lines, start=1):
        if number > spec.T:
            raise ARCInputError(f"line {number}: path has more than T={spec.T} prices")
        try:
            price = float(raw.strip())
        except ValueError:
            raise ARCInputError(f"line {number}: {raw.strip()!r} is not a price") from None
        if not math.isfinite(price) or not spec.m <= price <= spec.M:
            raise ARCInputError(f"line {number}: price {price} outside [{spec.m}, {spec.M}]")
        prices.append(price)
    if len(prices) != spec.T:
        raise ARCInputError(f"line {len(prices) + 1}: expected {spec.T} prices, found {len(prices)}")
    return prices


def cr_report(name: str, result: CrResult) -> list[str]:
    lines = [
        f"problem: {name}",
        f"beta0: {fmt(result.beta0)}",
        f"tolerance: {result.tolerance:g}",
        f"iterations: {result.iterations}",
        f"degenerate: {str(result.degenerate).lower()}",
    ]
    if result.degenerate:
        lines.append(f"D(0): {fmt(result.d_zero)}")
    return lines


def simulation_summary(result: SimulationResult) -> str:
    verdict = "PASS" if result.within_guarantee else "FAIL"
    return (
        f"revenue {fmt(result.revenue)} regret {fmt(result.regret)} "
        f"guarantee {fmt(result.guarantee)} {verdict}"
    )


def check_line(passed: bool, suite: str, detail: str) -> str:
    return f"{'PASS' if passed else 'FAIL'} {suite}: {detail}"
