"""Mixed-type tabular core: columns with per-cell missingness, frames,
row subsetting/stacking, and v-fold plans.

Missingness is a per-cell boolean flag, never a sentinel value, so numeric
columns can hold any real number. Frames are immutable after construction
(all arrays are frozen) and safe to share across threads and processes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import InvalidConfigError, SchemaError

NUMERIC = "numeric"
NOMINAL = "nominal"


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Column:
    """One named column: numeric values or nominal level codes, plus a
    missingness mask. The stored value at a missing cell is meaningless."""

    name: str
    kind: str
    values: np.ndarray          # float64 (numeric) or int64 level codes (nominal)
    missing: np.ndarray         # bool, same length
    levels: tuple[str, ...] = ()

    def __post_init__(self):
        if self.kind not in (NUMERIC, NOMINAL):
            raise SchemaError(f"unknown column kind {self.kind!r}")
        if self.kind == NOMINAL and not self.levels:
            raise SchemaError(f"nominal column {self.name!r} needs a level set")
        dtype = np.float64 if self.kind == NUMERIC else np.int64
        object.__setattr__(self, "values", _frozen(np.asarray(self.values, dtype=dtype)))
        object.__setattr__(self, "missing", _frozen(np.asarray(self.missing, dtype=bool)))
        if self.values.shape != self.missing.shape or self.values.ndim != 1:
            raise SchemaError(f"column {self.name!r}: values/missing shape mismatch")
        if self.kind == NOMINAL:
            obs = self.values[~self.missing]
            if obs.size and (obs.min() < 0 or obs.max() >= len(self.levels)):
                raise SchemaError(f"column {self.name!r}: code outside level set")

    @staticmethod
    def numeric(name: str, values, missing=None) -> "Column":
        values = np.asarray(values, dtype=np.float64)
        if missing is None:
            missing = np.zeros(len(values), dtype=bool)
        return Column(name, NUMERIC, values, np.asarray(missing, dtype=bool))

    @staticmethod
    def nominal(name: str, codes, levels: Sequence[str], missing=None) -> "Column":
        codes = np.asarray(codes, dtype=np.int64)
        if missing is None:
            missing = np.zeros(len(codes), dtype=bool)
        return Column(name, NOMINAL, codes, np.asarray(missing, dtype=bool), tuple(levels))

    @property
    def n(self) -> int:
        return len(self.values)

    def take(self, rows: np.ndarray) -> "Column":
        return Column(self.name, self.kind, self.values[rows], self.missing[rows], self.levels)

    def same_schema(self, other: "Column") -> bool:
        return (self.name == other.name and self.kind == other.kind
                and self.levels == other.levels)


@dataclass(frozen=True)
class Frame:
    """Ordered columns of equal length, with an optional designated outcome.

    The outcome column, when present, must be numeric and fully observed.
    ``row_ids`` carry provenance through splits and stacks; they are used by
    leakage tests and otherwise ignored.
    """

    columns: tuple[Column, ...]
    outcome_name: Optional[str] = None
    row_ids: Optional[np.ndarray] = None

    def __post_init__(self):
        object.__setattr__(self, "columns", tuple(self.columns))
        names = [c.name for c in self.columns]
        if len(set(names)) != len(names):
            raise SchemaError("duplicate column names")
        lengths = {c.n for c in self.columns}
        if len(lengths) > 1:
            raise SchemaError("columns have differing lengths")
        if self.outcome_name is not None:
            y = self.column(self.outcome_name)
            if y.kind != NUMERIC:
                raise SchemaError("outcome column must be numeric")
            if y.missing.any():
                raise SchemaError("outcome column must have no missing cells")
        if self.row_ids is not None:
            ids = _frozen(np.asarray(self.row_ids, dtype=np.int64))
            if len(ids) != self.n_rows:
                raise SchemaError("row_ids length mismatch")
            object.__setattr__(self, "row_ids", ids)

    @property
    def n_rows(self) -> int:
        return self.columns[0].n if self.columns else 0

    def column(self, name: str) -> Column:
        for c in self.columns:
            if c.name == name:
                return c
        raise SchemaError(f"no column named {name!r}")

    @property
    def predictor_columns(self) -> tuple[Column, ...]:
        return tuple(c for c in self.columns if c.name != self.outcome_name)

    def outcome(self) -> np.ndarray:
        if self.outcome_name is None:
            raise SchemaError("frame has no outcome column")
        return self.column(self.outcome_name).values

    def take(self, rows) -> "Frame":
        rows = np.asarray(rows)
        ids = self.row_ids[rows] if self.row_ids is not None else None
        return Frame(tuple(c.take(rows) for c in self.columns), self.outcome_name, ids)

    def same_schema(self, other: "Frame") -> bool:
        if len(self.columns) != len(other.columns):
            return False
        return all(a.same_schema(b) for a, b in zip(self.columns, other.columns))

    def n_missing_cells(self) -> int:
        return int(sum(c.missing.sum() for c in self.predictor_columns))

    def predictor_arrays(self):
        """Dense views for the imputation kernels.

        Returns (values, observed, nominal_flags, n_levels, names):
        values is float64 n x p (nominal codes cast to float), observed is
        uint8 n x p with 1 = observed, nominal_flags is uint8 length p,
        n_levels is int64 length p (0 for numeric columns).
        """
        cols = self.predictor_columns
        n, p = self.n_rows, len(cols)
        vals = np.empty((n, p), dtype=np.float64)
        obs = np.empty((n, p), dtype=np.uint8)
        nom = np.zeros(p, dtype=np.uint8)
        nlev = np.zeros(p, dtype=np.int64)
        for j, c in enumerate(cols):
            vals[:, j] = c.values
            obs[:, j] = ~c.missing
            if c.kind == NOMINAL:
                nom[j] = 1
                nlev[j] = len(c.levels)
        return vals, obs, nom, nlev, [c.name for c in cols]


@dataclass(frozen=True)
class FoldPlan:
    """Assignment of n rows to v folds."""

    v: int
    assignment: np.ndarray      # int64, values in [0, v)
    grouped: bool = False

    def __post_init__(self):
        a = _frozen(np.asarray(self.assignment, dtype=np.int64))
        object.__setattr__(self, "assignment", a)
        if a.size and (a.min() < 0 or a.max() >= self.v):
            raise InvalidConfigError("fold index out of range")
        if len(np.unique(a)) != self.v:
            raise InvalidConfigError("some fold is empty")

    @property
    def n(self) -> int:
        return len(self.assignment)


def make_folds(n: int, v: int, seed: int, groups=None) -> FoldPlan:
    """Plan v folds over n rows.

    Without groups: seeded shuffle then round-robin dealing, so fold sizes
    differ by at most one. With groups: fold index = index of the row's group
    label in the sorted distinct labels (the distinct-label count must be v).
    """
    if not (n >= v >= 2):
        raise InvalidConfigError(f"need n >= v >= 2, got n={n}, v={v}")
    if groups is not None:
        groups = np.asarray(groups)
        if len(groups) != n:
            raise InvalidConfigError("groups length must equal n")
        labels, assignment = np.unique(groups, return_inverse=True)
        if len(labels) != v:
            raise InvalidConfigError(
                f"got {len(labels)} distinct group labels for v={v} folds")
        return FoldPlan(v, assignment.astype(np.int64), grouped=True)
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    assignment = np.empty(n, dtype=np.int64)
    assignment[perm] = np.arange(n) % v
    return FoldPlan(v, assignment, grouped=False)


def split(frame: Frame, plan: FoldPlan, fold: int) -> tuple[Frame, Frame]:
    """(analysis, assessment): assessment holds the rows assigned to ``fold``,
    analysis the rest, row order preserved in both."""
    if not (0 <= fold < plan.v):
        raise IndexError(f"fold {fold} out of range for v={plan.v}")
    if plan.n != frame.n_rows:
        raise SchemaError("fold plan length does not match frame")
    mask = plan.assignment == fold
    idx = np.arange(frame.n_rows)
    return frame.take(idx[~mask]), frame.take(idx[mask])


def stack(a: Frame, b: Frame) -> Frame:
    """Row-wise concatenation, a's rows first. Schemas must match exactly."""
    if not a.same_schema(b) or a.outcome_name != b.outcome_name:
        raise SchemaError("cannot stack frames with differing schemas")
    cols = tuple(
        Column(ca.name, ca.kind,
               np.concatenate([ca.values, cb.values]),
               np.concatenate([ca.missing, cb.missing]),
               ca.levels)
        for ca, cb in zip(a.columns, b.columns))
    ids = None
    if a.row_ids is not None and b.row_ids is not None:
        ids = np.concatenate([a.row_ids, b.row_ids])
    return Frame(cols, a.outcome_name, ids)


def frame_from_matrix(X: np.ndarray, names: Sequence[str],
                      y: Optional[np.ndarray] = None,
                      outcome_name: str = "y",
                      missing: Optional[np.ndarray] = None,
                      row_ids: Optional[np.ndarray] = None) -> Frame:
    """Convenience constructor for all-numeric frames."""
    X = np.asarray(X, dtype=np.float64)
    cols = []
    if y is not None:
        cols.append(Column.numeric(outcome_name, np.asarray(y, dtype=np.float64)))
    for j, name in enumerate(names):
        miss = missing[:, j] if missing is not None else None
        cols.append(Column.numeric(name, X[:, j], miss))
    return Frame(tuple(cols), outcome_name if y is not None else None, row_ids)
