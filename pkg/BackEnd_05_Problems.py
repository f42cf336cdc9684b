"""
Problem sources: the builtin corpus and problem files.

A problem file is either

    matrix R C
    <R lines of C reals>

or a single line

    oneway m=<v> M=<v> T=<n> [prices=<n>] [alloc=<n>]

Blank lines and lines starting with '#' are ignored. The one-way line can
also be passed directly as a problem source.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from BackEnd_01_ARC_Core import ARCInputError, TreeProblem
from BackEnd_03_OneWay_Trading import MarketSpec

from BackEnd_05_Problem_Library.BackEnd_05_Problem_Capacity import Capacity_Problem
from BackEnd_05_Problem_Library.BackEnd_05_Problem_Matrix import MATRIX_CORPUS, Matrix_From_Rows, Matrix_Problem
from BackEnd_05_Problem_Library.BackEnd_05_Problem_OneWay import (
    DEFAULT_ALLOC_LOTS,
    DEFAULT_PRICE_POINTS,
    ONEWAY_CORPUS,
    OneWay_Corpus_Problem,
    OneWay_Problem,
)

logger = logging.getLogger(__name__)

ONEWAY_KEYS = {"m": float, "M": float, "T": int, "prices": int, "alloc": int}


class ProblemFileError(ARCInputError):
    def __init__(self, message: str, line: int | None = None, source: str = "<problem>"):
        self.line = line
        self.source = source
        where = f"{source}, line {line}" if line is not None else source
        super().__init__(f"{where}: {message}")


@dataclass(frozen=True)
class LoadedProblem:
    name: str
    problem: TreeProblem
    market: MarketSpec | None = None
    prices: int | None = None
    alloc: int | None = None


def builtin_names() -> list[str]:
    return list(MATRIX_CORPUS) + list(ONEWAY_CORPUS) + ["capacity"]


def builtin_problem(name: str) -> LoadedProblem:
    if name in MATRIX_CORPUS:
        return LoadedProblem(name, Matrix_Problem(name))
    if name in ONEWAY_CORPUS:
        spec, prices, alloc = ONEWAY_CORPUS[name]
        return LoadedProblem(name, OneWay_Corpus_Problem(name), spec, prices, alloc)
    if name == "capacity":
        return LoadedProblem(name, Capacity_Problem())
    raise ARCInputError(f"unknown builtin problem {name!r}; known: {builtin_names()}")


def _content_lines(text: str) -> list[tuple[int, str]]:
    out = []
    for number, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if stripped and not stripped.startswith("#"):
            out.append((number, stripped))
    return out


def _parse_oneway(line_no: int, line: str, source: str) -> LoadedProblem:
    values: dict = {}
    for token in line.split()[1:]:
        key, sep, raw = token.partition("=")
        if not sep or key not in ONEWAY_KEYS:
            raise ProblemFileError(f"unexpected token {token!r}; expected one of {sorted(ONEWAY_KEYS)} as key=value", line_no, source)
        if key in values:
            raise ProblemFileError(f"{key} given twice", line_no, source)
        try:
            values[key] = ONEWAY_KEYS[key](raw)
        except ValueError:
            raise ProblemFileError(f"{key}={raw!r} is not a valid {ONEWAY_KEYS[key].__name__}", line_no, source) from None
    missing = [k for k in ("m", "M", "T") if k not in values]
    if missing:
        raise ProblemFileError(f"missing {', '.join(missing)}", line_no, source)

    prices = values.get("prices", DEFAULT_PRICE_POINTS)
    alloc = values.get("alloc", DEFAULT_ALLOC_LOTS)
    try:
        spec = MarketSpec(values["m"], values["M"], values["T"])
        problem = OneWay_Problem(spec, prices, alloc)
    except ARCInputError as err:
        raise ProblemFileError(str(err), line_no, source) from None
    return LoadedProblem(spec.label(), problem, spec, prices, alloc)


def _parse_matrix(lines: list[tuple[int, str]], source: str, name: str) -> LoadedProblem:
    header_no, header = lines[0]
    fields = header.split()
    if len(fields) != 3:
        raise ProblemFileError("matrix header must read 'matrix R C'", header_no, source)
    try:
        n_rows, n_cols = int(fields[1]), int(fields[2])
    except ValueError:
        raise ProblemFileError(f"matrix dimensions {fields[1:]} are not integers", header_no, source) from None
    if n_rows < 1 or n_cols < 1:
        raise ProblemFileError(f"matrix dimensions must be positive, got {n_rows}x{n_cols}", header_no, source)

    body = lines[1:]
    if len(body) != n_rows:
        at = body[n_rows][0] if len(body) > n_rows else (body[-1][0] if body else header_no) + 1
        raise ProblemFileError(f"expected {n_rows} matrix rows, found {len(body)}", at, source)
    table = np.empty((n_rows, n_cols), dtype=float)
    for i, (line_no, line) in enumerate(body):
        entries = line.split()
        if len(entries) != n_cols:
            raise ProblemFileError(f"expected {n_cols} entries, found {len(entries)}", line_no, source)
        try:
            table[i] = [float(e) for e in entries]
        except ValueError:
            raise ProblemFileError(f"non-numeric entry in {line!r}", line_no, source) from None
        if not np.all(np.isfinite(table[i])):
            raise ProblemFileError("entries must be finite", line_no, source)
    return LoadedProblem(name, Matrix_From_Rows(table, name=name))


def parse_problem_text(text: str, source: str = "<problem>", name: str | None = None) -> LoadedProblem:
    lines = _content_lines(text)
    if not lines:
        raise ProblemFileError("no problem description found", None, source)
    first_no, first = lines[0]
    kind = first.split()[0]
    if kind == "oneway":
        if len(lines) > 1:
            raise ProblemFileError("a one-way description is a single line", lines[1][0], source)
        return _parse_oneway(first_no, first, source)
    if kind == "matrix":
        return _parse_matrix(lines, source, name or Path(source).stem)
    raise ProblemFileError(f"unknown problem kind {kind!r}; expected 'matrix' or 'oneway'", first_no, source)


def load_problem(source: str) -> LoadedProblem:
    """Builtin name, inline 'oneway ...' description, or path to a problem file."""
    source = source.strip()
    if source in builtin_names():
        return builtin_problem(source)
    if source.startswith("oneway "):
        return parse_problem_text(source, source="<inline>")
    path = Path(source)
    if not path.is_file():
        raise ARCInputError(f"{source!r} is neither a builtin problem nor a readable file")
    logger.info("loading problem file %s", path)
    return parse_problem_text(path.read_text(encoding="utf-8"), source=str(path), name=path.stem)
