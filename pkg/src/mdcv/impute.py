"""Gower-distance kNN imputation and mean/mode imputation with a strict
fit(donors)/transform(recipients) separation.

Distances live in [0, 1]: range-normalized absolute difference for numeric
columns (ranges frozen at fit time; out-of-range recipients clip at 1),
mismatch indicator for nominal columns, averaged over the columns observed
in both rows. The outcome column never participates.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import _kernels
from .errors import FitError, ImputationError, SchemaError
from .frame import NOMINAL, NUMERIC, Column, Frame


@dataclass(frozen=True)
class GowerSpace:
    """Per-column scaling learned from the fit data."""

    names: tuple[str, ...]
    nominal: np.ndarray        # uint8 flags
    n_levels: np.ndarray       # int64, 0 for numeric
    mins: np.ndarray           # float64, nan for nominal
    ranges: np.ndarray         # float64 (max - min over observed fit cells)

    @property
    def inv_ranges(self) -> np.ndarray:
        # zero range marks a non-discriminating column: dissimilarity 0
        with np.errstate(divide="ignore"):
            inv = np.where(self.ranges > 0, 1.0 / self.ranges, 0.0)
        return np.where(self.nominal.astype(bool), 0.0, inv)


@dataclass(frozen=True)
class SimpleImputer:
    """Column mean (numeric) / mode (nominal) of the observed donor cells."""

    names: tuple[str, ...]
    fill_values: np.ndarray    # float64; level code for nominal columns

    def transform(self, recipients: Frame) -> Frame:
        cols = []
        for c in recipients.columns:
            if c.name == recipients.outcome_name or not c.missing.any():
                cols.append(c)
                continue
            j = self.names.index(c.name)
            values = c.values.copy()
            if c.kind == NOMINAL:
                values[c.missing] = int(self.fill_values[j])
            else:
                values[c.missing] = self.fill_values[j]
            cols.append(Column(c.name, c.kind, values,
                               np.zeros(c.n, dtype=bool), c.levels))
        return Frame(tuple(cols), recipients.outcome_name, recipients.row_ids)


def fit_simple(donors: Frame) -> SimpleImputer:
    names, fills = [], []
    for c in donors.predictor_columns:
        obs = c.values[~c.missing]
        if obs.size == 0:
            raise FitError(f"column {c.name!r} has no observed donor cells")
        names.append(c.name)
        if c.kind == NOMINAL:
            # mode; ties resolve to the lowest level code
            fills.append(float(np.bincount(obs.astype(np.int64),
                                           minlength=len(c.levels)).argmax()))
        else:
            fills.append(float(obs.mean()))
    return SimpleImputer(tuple(names), np.asarray(fills))


def _fit_space(donors: Frame) -> GowerSpace:
    names, noms, nlevs, mins, ranges = [], [], [], [], []
    for c in donors.predictor_columns:
        obs = c.values[~c.missing]
        if obs.size == 0:
            raise FitError(f"column {c.name!r} has no observed donor cells")
        names.append(c.name)
        if c.kind == NOMINAL:
            noms.append(1)
            nlevs.append(len(c.levels))
            mins.append(np.nan)
            ranges.append(0.0)
        else:
            noms.append(0)
            nlevs.append(0)
            mins.append(float(obs.min()))
            ranges.append(float(obs.max() - obs.min()))
    return GowerSpace(tuple(names), np.asarray(noms, dtype=np.uint8),
                      np.asarray(nlevs, dtype=np.int64),
                      np.asarray(mins), np.asarray(ranges))


@dataclass(frozen=True)
class KnnImputer:
    donors: Frame
    space: GowerSpace
    k: int
    simple: SimpleImputer


def fit_knn(donors: Frame, k: int) -> KnnImputer:
    if donors.n_rows == 0:
        raise FitError("empty donor frame")
    if k < 1:
        raise FitError(f"k must be >= 1, got {k}")
    return KnnImputer(donors, _fit_space(donors), k, fit_simple(donors))


def gower_distance(a: Sequence, b: Sequence, space: GowerSpace) -> Optional[float]:
    """Distance between two rows given as per-column cell sequences aligned
    with the space (None = missing). Returns None when no column is usable."""
    total, usable = 0.0, 0
    for j, (x, y) in enumerate(zip(a, b)):
        if x is None or y is None:
            continue
        usable += 1
        if space.nominal[j]:
            total += 0.0 if x == y else 1.0
        else:
            total += min(abs(float(x) - float(y)) * space.inv_ranges[j], 1.0)
    if usable == 0:
        return None
    return total / usable


def _check_predictor_schema(imputer: KnnImputer, recipients: Frame) -> None:
    d = imputer.donors.predictor_columns
    r = recipients.predictor_columns
    if len(d) != len(r) or not all(a.same_schema(b) for a, b in zip(d, r)):
        raise SchemaError("recipient predictors do not match donor schema")


def impute_grid(donors: Frame, recipients: Optional[Frame],
                ks: Sequence[int]) -> dict[int, Frame]:
    """Impute recipients (or donors against themselves when recipients is
    None) once per k, sharing a single donor ranking per recipient row.

    Output per k is identical to a naive per-k transform.
    """
    if not ks:
        raise ImputationError("ks must be nonempty")
    imputer = fit_knn(donors, max(int(k) for k in ks))
    return _grid_transform(imputer, recipients if recipients is not None else donors,
                           [int(k) for k in ks])


def grid_transform(imputer: KnnImputer, recipients: Optional[Frame],
                   ks: Sequence[int]) -> dict[int, Frame]:
    """Grid imputation reusing an already fitted imputer (the imputer's own
    k is ignored; each requested k is produced)."""
    target = recipients if recipients is not None else imputer.donors
    return _grid_transform(imputer, target, [int(k) for k in ks])


def transform(imputer: KnnImputer, recipients: Frame) -> Frame:
    """Fill every missing predictor cell from the k nearest eligible donors."""
    return _grid_transform(imputer, recipients, [imputer.k])[imputer.k]


def transform_self(imputer: KnnImputer) -> Frame:
    """Impute the donor frame against itself. A row never donates to its own
    missing cells (it lacks the value), so this equals transform(donors)."""
    return transform(imputer, imputer.donors)


def _grid_transform(imputer: KnnImputer, recipients: Frame,
                    ks: Sequence[int]) -> dict[int, Frame]:
    _check_predictor_schema(imputer, recipients)
    ks_sorted = np.asarray(sorted(set(ks)), dtype=np.int64)
    if ks_sorted[0] < 1:
        raise ImputationError("k values must be >= 1")

    d_vals, d_obs, nom, nlev, _ = imputer.donors.predictor_arrays()
    r_vals, r_obs, _, _, _ = recipients.predictor_arrays()
    miss = np.argwhere(r_obs == 0)
    if len(miss) == 0:
        return {int(k): recipients for k in ks}
    miss_rows = np.ascontiguousarray(miss[:, 0], dtype=np.int64)
    miss_cols = np.ascontiguousarray(miss[:, 1], dtype=np.int64)

    imputed, fallback = _kernels.knn_impute_grid(
        d_vals, d_obs, r_vals, r_obs, nom, nlev,
        np.ascontiguousarray(imputer.space.inv_ranges),
        miss_rows, miss_cols, ks_sorted)
    if fallback.any():
        fills = imputer.simple.fill_values[miss_cols[fallback]]
        imputed[:, fallback] = fills[None, :]

    pred_names = [c.name for c in recipients.predictor_columns]
    out: dict[int, Frame] = {}
    for ki, k in enumerate(ks_sorted):
        filled = r_vals.copy()
        filled[miss_rows, miss_cols] = imputed[ki]
        cols = []
        for c in recipients.columns:
            if c.name == recipients.outcome_name:
                cols.append(c)
                continue
            j = pred_names.index(c.name)
            if not c.missing.any():
                cols.append(c)
                continue
            if c.kind == NOMINAL:
                values = np.round(filled[:, j]).astype(np.int64)
            else:
                values = filled[:, j]
            cols.append(Column(c.name, c.kind, values,
                               np.zeros(c.n, dtype=bool), c.levels))
        out[int(k)] = Frame(tuple(cols), recipients.outcome_name, recipients.row_ids)
    result = {}
    for k in ks:
        result[int(k)] = out[int(k)]
    return result
