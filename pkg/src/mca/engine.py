"""Quantile-window subpopulations and the multiresolution correlation grid.

A window is parameterized by a center quantile alpha and half-width beta,
with 0 < beta <= 1/2 and beta <= alpha <= 1 - beta.  Against the active rows
sorted by the sorting variable (ties broken by ascending row index), it
selects the 1-based rank positions

    lo = floor((alpha - beta) * M') + 1
    hi = floor((alpha + beta) * M' + 1/2)

clamped to [1, M'].  The grid enumerates beta = k/R for k = 1 .. floor(R/2)
and, for each beta, alpha = beta, beta + 1/R, ..., 1 - beta.  Coordinates
are stepped as exact rationals, so the lattice carries no floating-point
drift, and the full-population cell (alpha = beta = 1/2) is appended
whenever R is odd and the lattice misses it.  Cells are pure functions of
the immutable inputs and may be evaluated in any order.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .correlation import CorrelationResult, pearson, spearman
from .data import FLOAT_FORMAT, DataMatrix, round12

__all__ = [
    "SubpopulationWindow",
    "MCACell",
    "MCAGrid",
    "resolve_window",
    "build_grid",
    "subpopulation_correlation",
    "lattice_cell_count",
    "grid_to_csv",
    "grid_from_csv",
    "grid_to_dict",
    "cell_to_dict",
]

_METHODS = {"pearson": pearson, "spearman": spearman}

GRID_CSV_COLUMNS = ("alpha", "beta", "n", "median_s", "r", "p", "significant", "omitted")


@dataclass(frozen=True)
class SubpopulationWindow:
    """A resolved quantile window: members are row indices in rank order."""

    sorting_variable: str
    alpha: float
    beta: float
    members: tuple[int, ...]
    median_sorting_value: float

    @property
    def n(self) -> int:
        return len(self.members)


@dataclass(frozen=True)
class MCACell:
    """One grid entry.  r and p_value are None when the cell is omitted
    (too few members) or the correlation is undefined (zero variance)."""

    alpha: float
    beta: float
    n: int
    r: float | None
    p_value: float | None
    significant: bool
    median_sorting_value: float
    omitted: bool
    appended: bool = False


@dataclass(frozen=True)
class MCAGrid:
    resolution: int
    sorting_variable: str
    pair: tuple[str, str]
    method: str
    p_threshold: float
    min_members: int
    cells: tuple[MCACell, ...]
    total_observations: int

    @property
    def lattice_cells(self) -> tuple[MCACell, ...]:
        return tuple(c for c in self.cells if not c.appended)

    def cell_at(self, alpha: float, beta: float) -> MCACell:
        for c in self.cells:
            if c.alpha == alpha and c.beta == beta:
                return c
        raise KeyError(f"no cell at ({alpha}, {beta})")


def lattice_cell_count(resolution: int) -> int:
    """Closed-form size of the (alpha, beta) lattice: m*m for R = 2m,
    m*(m+1) for R = 2m + 1."""
    m = resolution // 2
    return m * m if resolution % 2 == 0 else m * (m + 1)


def _as_fraction(value) -> Fraction:
    # Floats are read through their shortest decimal form, so alpha=0.3 means
    # the decimal 3/10 rather than the binary double just below it; rank
    # bounds then match the decimal arithmetic the caller intended.
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    v = float(value)
    if not math.isfinite(v):
        raise ValueError(f"window coordinate must be finite, got {value!r}")
    return Fraction(str(v))


def _validate_window_coords(alpha: Fraction, beta: Fraction) -> None:
    if not 0 < beta <= Fraction(1, 2):
        raise ValueError(f"beta must lie in (0, 1/2], got {float(beta)}")
    if not beta <= alpha <= 1 - beta:
        raise ValueError(
            f"window [alpha-beta, alpha+beta] must lie inside [0, 1]; "
            f"got alpha={float(alpha)}, beta={float(beta)}"
        )


def _rank_bounds(alpha: Fraction, beta: Fraction, m: int) -> tuple[int, int]:
    lo = math.floor((alpha - beta) * m) + 1
    hi = math.floor((alpha + beta) * m + Fraction(1, 2))
    lo = min(max(lo, 1), m)
    hi = min(max(hi, 1), m)
    # A band narrower than one rank step resolves to its first rank position.
    return lo, max(hi, lo)


def _active_indices(d: DataMatrix, active) -> np.ndarray:
    if active is None:
        return np.arange(d.n_observations)
    idx = sorted({int(i) for i in active})
    if not idx:
        raise ValueError("active set is empty")
    if idx[0] < 0 or idx[-1] >= d.n_observations:
        raise ValueError(f"active row index out of range: {idx[0] if idx[0] < 0 else idx[-1]}")
    return np.asarray(idx, dtype=int)


def _sorted_by(d: DataMatrix, s: str, act: np.ndarray) -> np.ndarray:
    vals = d.column(s)[act]
    if not np.isfinite(vals).all():
        raise ValueError(
            f"sorting variable {s!r} has missing values; drop incomplete rows first"
        )
    # act is ascending, so a stable sort breaks value ties by row index.
    return act[np.argsort(vals, kind="stable")]


def _median_of_sorted(vals: np.ndarray) -> float:
    n = len(vals)
    mid = n // 2
    if n % 2:
        return float(vals[mid])
    return float((vals[mid - 1] + vals[mid]) / 2.0)


def resolve_window(
    d: DataMatrix, s: str, alpha, beta, active=None
) -> SubpopulationWindow:
    """Resolve the rank window of (alpha, beta) over the active rows."""
    af, bf = _as_fraction(alpha), _as_fraction(beta)
    _validate_window_coords(af, bf)
    act = _active_indices(d, active)
    ordered = _sorted_by(d, s, act)
    lo, hi = _rank_bounds(af, bf, len(ordered))
    members = ordered[lo - 1 : hi]
    med = _median_of_sorted(d.column(s)[members])
    return SubpopulationWindow(
        sorting_variable=s,
        alpha=float(af),
        beta=float(bf),
        members=tuple(int(i) for i in members),
        median_sorting_value=med,
    )


def subpopulation_correlation(
    d: DataMatrix, window: SubpopulationWindow, i: str, j: str, method: str = "pearson"
) -> CorrelationResult:
    """Correlation of columns i and j restricted to the window members."""
    if method not in _METHODS:
        raise ValueError(f"unknown method {method!r}")
    if window.n < 2:
        raise ValueError("window has fewer than 2 members")
    mem = list(window.members)
    return _METHODS[method](d.column(i)[mem], d.column(j)[mem])


def _finite_column(d: DataMatrix, name: str, act: np.ndarray) -> np.ndarray:
    col = d.column(name)
    if not np.isfinite(col[act]).all():
        raise ValueError(
            f"variable {name!r} has missing values; drop incomplete rows first"
        )
    return col


def build_grid(
    d: DataMatrix,
    s: str,
    i: str,
    j: str,
    resolution: int,
    method: str = "pearson",
    p_threshold: float = 0.05,
    min_members: int = 3,
    active=None,
) -> MCAGrid:
    """Evaluate the correlation of (i, j) on every lattice window of s."""
    if len({s, i, j}) != 3:
        raise ValueError("sorting variable and pair must be three distinct variables")
    if method not in _METHODS:
        raise ValueError(f"unknown method {method!r}")
    if not isinstance(resolution, int) or resolution < 2:
        raise ValueError(f"resolution must be an integer >= 2, got {resolution!r}")
    if not 0 < p_threshold <= 1:
        raise ValueError(f"p threshold must lie in (0, 1], got {p_threshold}")
    if min_members < 2:
        raise ValueError(f"min_members must be >= 2, got {min_members}")
    act = _active_indices(d, active)
    mp = len(act)
    if resolution > mp:
        raise ValueError(f"resolution {resolution} exceeds {mp} active observations")
    ordered = _sorted_by(d, s, act)
    s_sorted = d.column(s)[ordered]
    col_i = _finite_column(d, i, act)
    col_j = _finite_column(d, j, act)
    estimator = _METHODS[method]

    coords = [
        (Fraction(a, resolution), Fraction(k, resolution))
        for k in range(1, resolution // 2 + 1)
        for a in range(k, resolution - k + 1)
    ]
    half = Fraction(1, 2)
    appended = (half, half) not in coords
    if appended:
        coords.append((half, half))

    cells = []
    for idx, (af, bf) in enumerate(coords):
        lo, hi = _rank_bounds(af, bf, mp)
        members = ordered[lo - 1 : hi]
        n = hi - lo + 1
        med = _median_of_sorted(s_sorted[lo - 1 : hi])
        is_appended = appended and idx == len(coords) - 1
        if n < min_members:
            cells.append(
                MCACell(float(af), float(bf), n, None, None, False, med, True, is_appended)
            )
            continue
        res = estimator(col_i[members], col_j[members])
        if res.defined:
            r, p = res.r, res.p_value
            significant = p <= p_threshold
        else:
            r, p, significant = None, None, False
        cells.append(
            MCACell(float(af), float(bf), n, r, p, significant, med, False, is_appended)
        )
    cells.sort(key=lambda c: (c.beta, c.alpha))
    return MCAGrid(
        resolution=resolution,
        sorting_variable=s,
        pair=(i, j),
        method=method,
        p_threshold=p_threshold,
        min_members=min_members,
        cells=tuple(cells),
        total_observations=mp,
    )


def cell_to_dict(cell: MCACell) -> dict:
    """JSON-ready cell record; floats quantized to the export precision."""
    return {
        "alpha": round12(cell.alpha),
        "beta": round12(cell.beta),
        "n": cell.n,
        "median_s": round12(cell.median_sorting_value),
        "r": None if cell.r is None else round12(cell.r),
        "p": None if cell.p_value is None else round12(cell.p_value),
        "significant": cell.significant,
        "omitted": cell.omitted,
    }


def grid_to_dict(grid: MCAGrid) -> dict:
    return {
        "sorting_variable": grid.sorting_variable,
        "pair": list(grid.pair),
        "resolution": grid.resolution,
        "method": grid.method,
        "p_threshold": round12(grid.p_threshold),
        "min_members": grid.min_members,
        "total_observations": grid.total_observations,
        "cells": [cell_to_dict(c) for c in grid.cells],
    }


def grid_to_csv(grid: MCAGrid) -> str:
    """One row per cell, sorted by (beta, alpha), 12 significant digits."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(GRID_CSV_COLUMNS)
    for c in grid.cells:
        writer.writerow(
            [
                FLOAT_FORMAT.format(c.alpha),
                FLOAT_FORMAT.format(c.beta),
                c.n,
                FLOAT_FORMAT.format(c.median_sorting_value),
                "" if c.r is None else FLOAT_FORMAT.format(c.r),
                "" if c.p_value is None else FLOAT_FORMAT.format(c.p_value),
                "true" if c.significant else "false",
                "true" if c.omitted else "false",
            ]
        )
    return out.getvalue()


def grid_from_csv(text: str) -> MCAGrid:
    """Rebuild a grid from its CSV export.

    The export schema does not carry variable names or analysis settings, so
    those fields come back blank / default; the resolution is inferred from
    the smallest beta and the population size from the full-population cell.
    """
    rows = list(csv.reader(io.StringIO(text)))
    rows = [r for r in rows if r]
    if not rows or tuple(rows[0]) != GRID_CSV_COLUMNS:
        raise ValueError(f"grid CSV must start with header {','.join(GRID_CSV_COLUMNS)}")
    if len(rows) == 1:
        raise ValueError("grid CSV has no cells")
    cells = []
    for row in rows[1:]:
        if len(row) != len(GRID_CSV_COLUMNS):
            raise ValueError(f"grid CSV row has {len(row)} fields, expected {len(GRID_CSV_COLUMNS)}")
        alpha, beta = float(row[0]), float(row[1])
        cells.append(
            MCACell(
                alpha=alpha,
                beta=beta,
                n=int(row[2]),
                median_sorting_value=float(row[3]),
                r=float(row[4]) if row[4] else None,
                p_value=float(row[5]) if row[5] else None,
                significant=row[6] == "true",
                omitted=row[7] == "true",
            )
        )
    cells.sort(key=lambda c: (c.beta, c.alpha))
    resolution = round(1.0 / min(c.beta for c in cells))
    return MCAGrid(
        resolution=max(2, resolution),
        sorting_variable="",
        pair=("", ""),
        method="",
        p_threshold=0.05,
        min_members=3,
        cells=tuple(cells),
        total_observations=max(c.n for c in cells),
    )
