"""Observation matrix: CSV ingestion, housekeeping normalization, compartments.

The matrix is immutable after construction.  Cells flagged in the missing
mask hold NaN and never feed any downstream computation; analyses that
cannot tolerate missing cells reject them explicitly.
"""

from __future__ import annotations

import csv
import io
import math
import os
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "DataMatrix",
    "CompartmentRule",
    "CsvFormatError",
    "load_csv",
    "drop_incomplete",
    "normalize_housekeeping",
    "apply_compartment",
    "round12",
    "FLOAT_FORMAT",
]

# All text serialization (CSV, JSON, SVG data attributes) uses 12 significant
# digits so every export surface agrees byte for byte.
FLOAT_FORMAT = "{:.12g}"

NA_TOKENS = frozenset({"", "na", "nan"})


def round12(v: float) -> float:
    """Quantize a float to the 12-significant-digit export precision."""
    return float(FLOAT_FORMAT.format(v))


class CsvFormatError(ValueError):
    """Structurally invalid CSV input."""


@dataclass(frozen=True, eq=False)
class DataMatrix:
    """M observations (rows) by N named variables (columns).

    excluded_variables lists columns that downstream analyses skip by
    default (e.g. a housekeeping gene after normalization); the column data
    itself is retained.
    """

    values: np.ndarray
    variable_names: tuple[str, ...]
    observation_ids: tuple[str, ...] = ()
    missing_mask: np.ndarray | None = None
    excluded_variables: frozenset[str] = frozenset()

    def __post_init__(self):
        values = np.array(self.values, dtype=float, copy=True)
        if values.ndim != 2:
            raise ValueError("values must be a 2-d matrix")
        m, n = values.shape
        if m < 1:
            raise ValueError("need at least one observation row")
        names = tuple(str(v) for v in self.variable_names)
        if len(names) != n:
            raise ValueError(f"{len(names)} variable names for {n} columns")
        if any(not name for name in names):
            raise ValueError("variable names must be nonempty")
        if len(set(names)) != len(names):
            dupes = sorted({x for x in names if names.count(x) > 1})
            raise ValueError(f"duplicate variable names: {dupes}")
        ids = tuple(str(v) for v in self.observation_ids) or tuple(
            str(i) for i in range(m)
        )
        if len(ids) != m:
            raise ValueError(f"{len(ids)} observation ids for {m} rows")
        if self.missing_mask is None:
            mask = ~np.isfinite(values)
        else:
            mask = np.array(self.missing_mask, dtype=bool, copy=True)
            if mask.shape != values.shape:
                raise ValueError("missing_mask shape differs from values")
        if not np.isfinite(values[~mask]).all():
            raise ValueError("non-finite value in an unmasked cell")
        unknown = frozenset(self.excluded_variables) - set(names)
        if unknown:
            raise ValueError(f"excluded_variables not in matrix: {sorted(unknown)}")
        values[mask] = np.nan
        values.setflags(write=False)
        mask.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "variable_names", names)
        object.__setattr__(self, "observation_ids", ids)
        object.__setattr__(self, "missing_mask", mask)
        object.__setattr__(self, "excluded_variables", frozenset(self.excluded_variables))

    @property
    def n_observations(self) -> int:
        return self.values.shape[0]

    @property
    def n_variables(self) -> int:
        return self.values.shape[1]

    @property
    def analysis_variables(self) -> tuple[str, ...]:
        """Variable names not flagged as excluded from default analyses."""
        return tuple(v for v in self.variable_names if v not in self.excluded_variables)

    def column_index(self, name: str) -> int:
        try:
            return self.variable_names.index(name)
        except ValueError:
            raise ValueError(f"unknown variable {name!r}") from None

    def column(self, name: str) -> np.ndarray:
        return self.values[:, self.column_index(name)]

    def column_missing(self, name: str) -> np.ndarray:
        return self.missing_mask[:, self.column_index(name)]

    def to_csv(self, delimiter: str = ",") -> str:
        """Serialize with 12 significant digits; missing cells become empty fields."""
        out = io.StringIO()
        writer = csv.writer(out, delimiter=delimiter, lineterminator="\n")
        writer.writerow(self.variable_names)
        for p in range(self.n_observations):
            writer.writerow(
                ""
                if self.missing_mask[p, q]
                else FLOAT_FORMAT.format(self.values[p, q])
                for q in range(self.n_variables)
            )
        return out.getvalue()


def _read_text(source) -> str:
    if isinstance(source, (str, os.PathLike)):
        with open(source, "rb") as fh:
            raw = fh.read()
    elif isinstance(source, bytes):
        raw = source
    elif hasattr(source, "read"):
        raw = source.read()
    else:
        raise TypeError(f"unsupported CSV source {type(source).__name__}")
    if isinstance(raw, bytes):
        return raw.decode("utf-8-sig")
    return raw


def load_csv(source, delimiter: str = ",") -> DataMatrix:
    """Parse a header-row CSV of numeric observations.

    source may be a path, raw bytes, or a readable file object.  Empty,
    "NA" and "NaN" fields (case-insensitive) are recorded as missing.
    """
    text = _read_text(source)
    rows = [row for row in csv.reader(io.StringIO(text), delimiter=delimiter)]
    rows = [row for row in rows if row]  # tolerate blank lines
    if not rows:
        raise CsvFormatError("empty CSV input")
    header = [h.strip() for h in rows[0]]
    if any(not h for h in header):
        raise CsvFormatError("empty variable name in header")
    if len(set(header)) != len(header):
        dupes = sorted({h for h in header if header.count(h) > 1})
        raise CsvFormatError(f"duplicate variable names: {dupes}")
    if len(rows) == 1:
        raise CsvFormatError("no observation rows")
    n = len(header)
    values = np.empty((len(rows) - 1, n))
    mask = np.zeros((len(rows) - 1, n), dtype=bool)
    for p, row in enumerate(rows[1:], start=2):
        if len(row) != n:
            raise CsvFormatError(f"line {p}: expected {n} fields, got {len(row)}")
        for q, token in enumerate(row):
            token = token.strip()
            if token.lower() in NA_TOKENS:
                values[p - 2, q] = np.nan
                mask[p - 2, q] = True
                continue
            try:
                v = float(token)
            except ValueError:
                raise CsvFormatError(f"line {p}: non-numeric field {token!r}") from None
            if not math.isfinite(v):
                raise CsvFormatError(f"line {p}: non-finite field {token!r}")
            values[p - 2, q] = v
    return DataMatrix(values=values, variable_names=tuple(header), missing_mask=mask)


def drop_incomplete(d: DataMatrix) -> tuple[DataMatrix, tuple[str, ...]]:
    """Remove every row with at least one missing cell.

    Returns the filtered matrix plus the observation ids that were dropped.
    """
    complete = ~d.missing_mask.any(axis=1)
    dropped = tuple(
        oid for oid, keep in zip(d.observation_ids, complete) if not keep
    )
    if not complete.any():
        raise ValueError("all rows have missing cells; nothing left to analyze")
    if not dropped:
        return d, ()
    kept = np.flatnonzero(complete)
    return (
        DataMatrix(
            values=d.values[kept],
            variable_names=d.variable_names,
            observation_ids=tuple(d.observation_ids[i] for i in kept),
            missing_mask=d.missing_mask[kept],
            excluded_variables=d.excluded_variables,
        ),
        dropped,
    )


def normalize_housekeeping(
    d: DataMatrix,
    housekeeping: str,
    offset: float = 0.0,
    offset_housekeeping: bool = True,
) -> DataMatrix:
    """Per-row normalization against a housekeeping variable.

    Every cell v becomes (v + offset) / (h + offset), h being that row's
    housekeeping value, so the housekeeping column becomes exactly 1.  With
    offset_housekeeping=False the divisor is the raw h instead.  The
    housekeeping column is kept but flagged in excluded_variables.
    """
    col = d.column_index(housekeeping)
    if d.missing_mask[:, col].any():
        bad = [d.observation_ids[i] for i in np.flatnonzero(d.missing_mask[:, col])]
        raise ValueError(f"housekeeping variable {housekeeping!r} missing for rows {bad}")
    h = d.values[:, col]
    denom = h + offset if offset_housekeeping else h
    if (denom <= 0).any():
        bad = [d.observation_ids[i] for i in np.flatnonzero(denom <= 0)]
        raise ValueError(
            f"housekeeping value not positive after offset for rows {bad}"
        )
    values = (d.values + offset) / denom[:, None]
    values[d.missing_mask] = np.nan
    return DataMatrix(
        values=values,
        variable_names=d.variable_names,
        observation_ids=d.observation_ids,
        missing_mask=d.missing_mask,
        excluded_variables=d.excluded_variables | {housekeeping},
    )


_RULE_KINDS = ("detected", "not_detected", "top_k", "bottom_k", "above", "below")


@dataclass(frozen=True)
class CompartmentRule:
    """One membership predicate over a single variable.

    kind is one of detected / not_detected (value strictly above a detection
    floor, default 0), top_k / bottom_k (k extreme rows, value ties broken by
    ascending row index), above / below (strict threshold comparisons).
    """

    variable: str
    kind: str
    parameter: float | int | None = None

    def __post_init__(self):
        if self.kind not in _RULE_KINDS:
            raise ValueError(f"unknown rule kind {self.kind!r}")
        if self.kind in ("top_k", "bottom_k"):
            k = self.parameter
            if not isinstance(k, int) or isinstance(k, bool) or k < 1:
                raise ValueError(f"{self.kind} needs an integer k >= 1, got {k!r}")
        if self.kind in ("above", "below") and self.parameter is None:
            raise ValueError(f"{self.kind} needs a threshold")


def _rule_indices(d: DataMatrix, rule: CompartmentRule) -> set[int]:
    col = d.column(rule.variable)
    if d.column_missing(rule.variable).any():
        raise ValueError(
            f"variable {rule.variable!r} has missing cells; drop incomplete rows first"
        )
    m = d.n_observations
    if rule.kind in ("top_k", "bottom_k"):
        k = int(rule.parameter)
        if k > m:
            raise ValueError(f"{rule.kind} k={k} exceeds {m} observations")
        idx = np.arange(m)
        if rule.kind == "top_k":
            order = np.lexsort((idx, -col))
        else:
            order = np.lexsort((idx, col))
        return set(int(i) for i in order[:k])
    if rule.kind == "detected":
        floor = 0.0 if rule.parameter is None else float(rule.parameter)
        return set(int(i) for i in np.flatnonzero(col > floor))
    if rule.kind == "not_detected":
        floor = 0.0 if rule.parameter is None else float(rule.parameter)
        return set(int(i) for i in np.flatnonzero(~(col > floor)))
    if rule.kind == "above":
        return set(int(i) for i in np.flatnonzero(col > float(rule.parameter)))
    return set(int(i) for i in np.flatnonzero(col < float(rule.parameter)))


def apply_compartment(d: DataMatrix, rules) -> tuple[int, ...]:
    """Row indices satisfying every rule, ascending."""
    rules = list(rules)
    if not rules:
        raise ValueError("need at least one rule")
    result: set[int] | None = None
    for rule in rules:
        hits = _rule_indices(d, rule)
        result = hits if result is None else result & hits
    return tuple(sorted(result))
