"""Command line for the adjustable regret toolkit."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

import click
import numpy as np
import pandas as pd

from BackEnd_01_ARC_Core import ARCError, ARCInputError, solve_plain
from BackEnd_02_ARC_Analysis import DEFAULT_TOLERANCE, Solver, competitive_ratio, convexity_check, regret_curve
from BackEnd_03_OneWay_Trading import (
    DEFAULT_SEED,
    MarketSpec,
    closed_form_curve,
    closed_form_ratio,
    overall_guarantee,
    policy_snapshot,
    random_paths,
    simulate,
)
from BackEnd_05_Problem_Library.BackEnd_05_Problem_OneWay import OneWay_Problem
from BackEnd_05_Problems import load_problem
from BackEnd_06_Reports import (
    cr_report,
    fmt,
    plot_data_path,
    read_price_path,
    simulation_summary,
    write_curve_csv,
    write_plot_data,
    write_trace_csv,
)
from BackEnd_07_Verify import SUITES, run_verification

logger = logging.getLogger(__name__)

COMMANDS = ("sweep", "cr", "oneway", "simulate", "verify")

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_DEGENERATE = 2
EXIT_FAILED = 3


@dataclass(frozen=True)
class RunConfig:
    command: str
    source: str | None = None
    beta_start: float = 0.0
    beta_stop: float = 1.0
    beta_count: int = 5
    tolerance: float = DEFAULT_TOLERANCE
    output: Path | None = None
    seed: int = DEFAULT_SEED
    beta: float = 1.0
    market: MarketSpec | None = None
    crosscheck: tuple = ()
    path_file: Path | None = None
    paths: int = 0
    only: tuple = ()

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ARCInputError(f"unknown command {self.command!r}")
        if self.command in ("sweep", "oneway") and self.beta_count < 2:
            raise ARCInputError(f"beta grid needs at least 2 points, got {self.beta_count}")
        if self.beta_start < 0 or self.beta_stop <= self.beta_start:
            raise ARCInputError(f"beta grid needs 0 <= start < stop, got [{self.beta_start}, {self.beta_stop}]")
        if not self.tolerance > 0:
            raise ARCInputError(f"tolerance must be positive, got {self.tolerance}")
        if self.command in ("sweep", "cr") and not self.source:
            raise ARCInputError(f"{self.command} needs a problem source")
        if self.command in ("oneway", "simulate") and self.market is None:
            raise ARCInputError(f"{self.command} needs a market (m, M, T)")
        if any(g < 2 for g in self.crosscheck):
            raise ARCInputError(f"crosscheck grids need at least 2 price points, got {list(self.crosscheck)}")

    @property
    def betas(self) -> np.ndarray:
        return np.linspace(self.beta_start, self.beta_stop, self.beta_count)

    def output_or(self, default: str) -> Path:
        return Path(self.output) if self.output is not None else Path(default)


def cmd_sweep(config: RunConfig, solver: Solver = solve_plain) -> tuple[list[str], int]:
    loaded = load_problem(config.source)
    curve = regret_curve(loaded.problem, config.betas, solver)
    csv_path = write_curve_csv(curve, config.output_or("sweep.csv"))
    dat_path = write_plot_data(curve, plot_data_path(csv_path))
    lines = [f"{s.beta:.6f} {fmt(s.value)} {s.policy_id}" for s in curve.samples]
    lines.append(f"wrote {csv_path} and {dat_path}")
    return lines, EXIT_OK


def cmd_cr(config: RunConfig, solver: Solver = solve_plain) -> tuple[list[str], int]:
    loaded = load_problem(config.source)
    result = competitive_ratio(loaded.problem, config.tolerance, solver)
    lines = cr_report(loaded.name, result)
    if loaded.market is not None:
        closed = closed_form_ratio(loaded.market, config.tolerance)
        lines.append(f"closed-form beta0: {fmt(closed.beta0)}")
    return lines, EXIT_DEGENERATE if result.degenerate else EXIT_OK


def cmd_oneway(config: RunConfig, solver: Solver = solve_plain) -> tuple[list[str], int]:
    spec = config.market
    curve = closed_form_curve(spec, config.betas)
    csv_path = write_curve_csv(curve, config.output_or("oneway.csv"))
    write_plot_data(curve, plot_data_path(csv_path))
    lines = [f"{spec.label()}: {len(curve.samples)} betas written to {csv_path}"]
    lines.append(f"convex: {str(convexity_check(curve)).lower()}")

    if config.beta > 0:
        snapshot = policy_snapshot(spec, config.beta)
        snapshot_path = csv_path.with_name(f"{csv_path.stem}_policy.csv")
        snapshot.to_csv(snapshot_path, index=False, lineterminator="\n")
        lines.append(f"first-period policy at beta={fmt(config.beta)} written to {snapshot_path}")

    closed = overall_guarantee(config.beta, spec)
    for g in config.crosscheck:
        alloc = 4 * (g - 1)
        engine = solver(OneWay_Problem(spec, g, alloc), config.beta).value
        lines.append(
            f"crosscheck prices={g} alloc={alloc} beta={fmt(config.beta)} "
            f"closed={fmt(closed)} engine={fmt(engine)} gap={fmt(abs(closed - engine))}"
        )
    return lines, EXIT_OK


def cmd_simulate(config: RunConfig) -> tuple[list[str], int]:
    spec = config.market
    if config.path_file is not None:
        path = read_price_path(config.path_file, spec)
        result = simulate(path, config.beta, spec)
        trace_path = write_trace_csv(result, config.output_or("trace.csv"))
        lines = [simulation_summary(result), f"trace written to {trace_path}"]
        return lines, EXIT_OK if result.within_guarantee else EXIT_FAILED

    if config.paths < 1:
        raise ARCInputError("simulate needs a price-path file or a positive number of random paths")
    rows, lines = [], []
    for k, path in enumerate(random_paths(spec, config.paths, config.seed), start=1):
        result = simulate(path, config.beta, spec)
        rows.append((k, result.revenue, result.regret, result.guarantee, result.within_guarantee))
        if not result.within_guarantee:
            lines.append(f"path {k}: {simulation_summary(result)}")
    summary_path = config.output_or("simulate.csv")
    summary_path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame(rows, columns=["path", "revenue", "regret", "guarantee", "within_guarantee"])
    frame.to_csv(summary_path, index=False, lineterminator="\n")
    failures = int((~frame["within_guarantee"]).sum())
    lines.append(
        f"{config.paths} paths (seed {config.seed}): max regret {fmt(frame['regret'].max())} "
        f"guarantee {fmt(overall_guarantee(config.beta, spec))} failures {failures}"
    )
    return lines, EXIT_FAILED if failures else EXIT_OK


def cmd_verify(config: RunConfig, solver: Solver = solve_plain, corpus=None) -> tuple[list[str], int]:
    results = run_verification(corpus, only=config.only or None, solver=solver)
    lines = [r.line() for r in results]
    failed = sum(not r.passed for r in results)
    lines.append(f"{len(results) - failed} passed, {failed} failed")
    return lines, EXIT_FAILED if failed else EXIT_OK


def _finish(ctx: click.Context, run) -> None:
    try:
        lines, code = run()
    except ARCInputError as err:
        raise click.ClickException(str(err)) from err
    except ARCError as err:
        raise click.ClickException(f"{type(err).__name__}: {err}") from err
    for line in lines:
        click.echo(line)
    ctx.exit(code)


class InputErrorGroup(click.Group):
    """Usage errors exit with EXIT_INPUT; exit code 2 means a degenerate result."""

    def make_context(self, info_name, args, parent=None, **extra):
        try:
            return super().make_context(info_name, args, parent=parent, **extra)
        except click.UsageError as err:
            err.exit_code = EXIT_INPUT
            raise

    def invoke(self, ctx):
        try:
            return super().invoke(ctx)
        except click.UsageError as err:
            err.exit_code = EXIT_INPUT
            raise


market_options = [
    click.option("--m", "m", type=float, required=True, help="Price floor."),
    click.option("--M", "M", type=float, required=True, help="Price ceiling."),
    click.option("--T", "T", type=int, required=True, help="Number of periods."),
]


def with_market(func):
    for option in reversed(market_options):
        func = option(func)
    return func


@click.group(cls=InputErrorGroup)
@click.option("-v", "--verbose", count=True, help="-v for progress, -vv for solver detail.")
def main(verbose: int):
    """Adjustable regret: curves, competitive ratios, one-way trading."""
    level = logging.WARNING if verbose == 0 else logging.INFO if verbose == 1 else logging.DEBUG
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", force=True)


@main.command()
@click.argument("source")
@click.option("--start", type=float, default=0.0, show_default=True)
@click.option("--stop", type=float, default=1.0, show_default=True)
@click.option("--count", type=int, default=5, show_default=True)
@click.option("--output", "-o", type=click.Path(path_type=Path), default=None, help="Curve CSV (default sweep.csv).")
@click.pass_context
def sweep(ctx, source, start, stop, count, output):
    """Sample D(beta) of SOURCE on an even beta grid."""
    _finish(ctx, lambda: cmd_sweep(RunConfig("sweep", source, start, stop, count, output=output)))


@main.command()
@click.argument("source")
@click.option("--tol", type=float, default=DEFAULT_TOLERANCE, show_default=True)
@click.pass_context
def cr(ctx, source, tol):
    """Competitive ratio of SOURCE as the root of D(beta) = 0."""
    _finish(ctx, lambda: cmd_cr(RunConfig("cr", source, tolerance=tol)))


@main.command()
@with_market
@click.option("--start", type=float, default=0.0, show_default=True)
@click.option("--stop", type=float, default=2.0, show_default=True)
@click.option("--count", type=int, default=101, show_default=True)
@click.option("--beta", type=float, default=1.0, show_default=True, help="Beta for policy snapshot and crosscheck.")
@click.option("--crosscheck", type=int, multiple=True, help="Price grid size of a discretization to compare against.")
@click.option("--output", "-o", type=click.Path(path_type=Path), default=None, help="Curve CSV (default oneway.csv).")
@click.pass_context
def oneway(ctx, m, M, T, start, stop, count, beta, crosscheck, output):
    """Closed-form one-way trading curve, policy snapshot and crosschecks."""
    config = lambda: RunConfig(
        "oneway", beta_start=start, beta_stop=stop, beta_count=count, output=output,
        beta=beta, market=MarketSpec(m, M, T), crosscheck=tuple(crosscheck),
    )
    _finish(ctx, lambda: cmd_oneway(config()))


@main.command("simulate")
@with_market
@click.option("--beta", type=float, default=1.0, show_default=True)
@click.option("--path-file", type=click.Path(exists=True, dir_okay=False, path_type=Path), default=None)
@click.option("--paths", type=int, default=0, help="Number of seeded random paths when no path file is given.")
@click.option("--seed", type=int, default=DEFAULT_SEED, show_default=True)
@click.option("--output", "-o", type=click.Path(path_type=Path), default=None)
@click.pass_context
def simulate_command(ctx, m, M, T, beta, path_file, paths, seed, output):
    """Replay the optimal policy on a price path or on random paths."""
    config = lambda: RunConfig(
        "simulate", output=output, seed=seed, beta=beta, market=MarketSpec(m, M, T),
        path_file=path_file, paths=paths,
    )
    _finish(ctx, lambda: cmd_simulate(config()))


@main.command()
@click.option("--only", type=click.Choice(list(SUITES)), multiple=True, help="Run only these suites.")
@click.pass_context
def verify(ctx, only):
    """Run the verification suites on the builtin corpus."""
    _finish(ctx, lambda: cmd_verify(RunConfig("verify", only=tuple(only))))


if __name__ == "__main__":
    main()
