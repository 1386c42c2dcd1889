"""Correlation estimators and significance testing for paired observations.

All reductions use exactly rounded summation (math.fsum), so estimates are
bit-identical under any permutation of the input pairs.  Significance is the
classical two-sided t test for zero correlation,

    t = r * sqrt((n - 2) / (1 - r^2)),   df = n - 2,

applied identically to Spearman's rank coefficient (large-n approximation).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import stdtr

__all__ = ["CorrelationResult", "pearson", "spearman", "significance", "SMALLEST_P"]

# Smallest representable positive double; returned for |r| = 1 and used as
# the p-value floor so p stays inside (0, 1].
SMALLEST_P = math.nextafter(0.0, 1.0)


@dataclass(frozen=True)
class CorrelationResult:
    """Estimate over n paired observations.

    defined is False when either input has zero variance; r is NaN and
    p_value 1.0 in that case.  p_value is also 1.0 when n < 3, where the t
    test has no degrees of freedom.
    """

    r: float
    n: int
    p_value: float
    method: str
    defined: bool


def _validated(x, y) -> tuple[list[float], list[float]]:
    xa = np.asarray(x, dtype=float)
    ya = np.asarray(y, dtype=float)
    if xa.ndim != 1 or ya.ndim != 1:
        raise ValueError("inputs must be one-dimensional vectors")
    if xa.shape[0] != ya.shape[0]:
        raise ValueError(f"length mismatch: {xa.shape[0]} vs {ya.shape[0]}")
    if xa.shape[0] < 2:
        raise ValueError("need at least 2 paired observations")
    if not (np.isfinite(xa).all() and np.isfinite(ya).all()):
        raise ValueError("inputs must be finite")
    return xa.tolist(), ya.tolist()


def _corr_of(xs: list[float], ys: list[float], method: str) -> CorrelationResult:
    n = len(xs)
    mx = math.fsum(xs) / n
    my = math.fsum(ys) / n
    sxx = math.fsum((v - mx) ** 2 for v in xs)
    syy = math.fsum((v - my) ** 2 for v in ys)
    if sxx == 0.0 or syy == 0.0:
        return CorrelationResult(float("nan"), n, 1.0, method, False)
    sxy = math.fsum((a - mx) * (b - my) for a, b in zip(xs, ys))
    denom = math.sqrt(sxx * syy)  # exact +-1 for perfectly linear pairs
    if math.isinf(denom):
        denom = math.sqrt(sxx) * math.sqrt(syy)
    r = sxy / denom
    r = max(-1.0, min(1.0, r))
    p = significance(r, n) if n >= 3 else 1.0
    return CorrelationResult(r, n, p, method, True)


def pearson(x, y) -> CorrelationResult:
    """Sample Pearson correlation (two-pass: means first, centered products after)."""
    xs, ys = _validated(x, y)
    return _corr_of(xs, ys, "pearson")


def fractional_ranks(values) -> list[float]:
    """1-based ranks; ties share the average of their rank positions."""
    values = list(values)
    order = sorted(range(len(values)), key=lambda k: (values[k], k))
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        v = values[order[i]]
        while j + 1 < len(order) and values[order[j + 1]] == v:
            j += 1
        avg = (i + j) / 2.0 + 1.0
        for k in range(i, j + 1):
            ranks[order[k]] = avg
        i = j + 1
    return ranks


def spearman(x, y) -> CorrelationResult:
    """Pearson correlation of the rank-transformed inputs."""
    xs, ys = _validated(x, y)
    return _corr_of(fractional_ranks(xs), fractional_ranks(ys), "spearman")


def significance(r: float, n: int) -> float:
    """Two-sided p-value of the t test for zero correlation."""
    if n < 3:
        raise ValueError(f"significance needs n >= 3, got {n}")
    if not math.isfinite(r) or abs(r) > 1.0:
        raise ValueError(f"correlation must lie in [-1, 1], got {r!r}")
    if abs(r) == 1.0:
        return SMALLEST_P
    t = r * math.sqrt((n - 2) / (1.0 - r * r))
    p = 2.0 * float(stdtr(n - 2, -abs(t)))
    return min(1.0, max(SMALLEST_P, p))
