"""Inject MCAR or MAR missingness into complete frames using randomly drawn
missing-data patterns.

A pattern is a boolean mask over the non-outcome columns marking which are
jointly set missing for a row. A fixed quota of rows (round(prop * n))
becomes incomplete; under MCAR they are chosen uniformly, under MAR with
probability given by a logistic function of a standardized weighted-sum
score over each row's still-observed columns (unit weights by default),
shifted by bisection so the expected incomplete fraction matches the quota.
The outcome column is never amputed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import InvalidConfigError, SchemaError
from .frame import Column, Frame

MCAR, MAR = "MCAR", "MAR"


@dataclass(frozen=True)
class MdPattern:
    mask: np.ndarray   # bool over the p non-outcome columns; True = missing

    def __post_init__(self):
        m = np.asarray(self.mask, dtype=bool)
        object.__setattr__(self, "mask", m)
        p = len(m)
        if not (1 <= int(m.sum()) <= p // 2):
            raise InvalidConfigError(
                f"pattern must set between 1 and {p // 2} of {p} columns missing")


@dataclass(frozen=True)
class AmputeConfig:
    patterns: tuple[MdPattern, ...]
    mechanism: str = MCAR
    prop_incomplete: float = 0.90
    mar_weights: Optional[np.ndarray] = None   # (n_patterns, p); default all 1

    def __post_init__(self):
        object.__setattr__(self, "patterns", tuple(self.patterns))
        if not self.patterns:
            raise InvalidConfigError("need at least one pattern")
        if self.mechanism not in (MCAR, MAR):
            raise InvalidConfigError(f"unknown mechanism {self.mechanism!r}")
        if not (0 < self.prop_incomplete <= 1):
            raise InvalidConfigError("prop_incomplete must be in (0, 1]")
        if self.mar_weights is not None:
            w = np.asarray(self.mar_weights, dtype=np.float64)
            if w.shape != (len(self.patterns), len(self.patterns[0].mask)):
                raise InvalidConfigError("mar_weights must be (n_patterns, p)")
            object.__setattr__(self, "mar_weights", w)


def gen_patterns(p: int, seed: int) -> tuple[MdPattern, ...]:
    """Draw a random pattern set: the count uniform on {1..p}, each pattern's
    missing-column count uniform on {1..floor(p/2)}, columns uniform without
    replacement. Duplicates are allowed."""
    if p < 2:
        raise InvalidConfigError("need at least 2 non-outcome columns")
    rng = np.random.default_rng(seed)
    n_patterns = int(rng.integers(1, p + 1))
    patterns = []
    for _ in range(n_patterns):
        n_miss = int(rng.integers(1, p // 2 + 1))
        cols = rng.choice(p, size=n_miss, replace=False)
        mask = np.zeros(p, dtype=bool)
        mask[cols] = True
        patterns.append(MdPattern(mask))
    return tuple(patterns)


def _sigmoid(x: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-x))


def _mar_selection_weights(scores: np.ndarray, m: int) -> np.ndarray:
    # bisect the logistic shift so the expected incomplete count equals m
    lo, hi = -50.0, 50.0
    for _ in range(200):
        mid = (lo + hi) / 2.0
        if _sigmoid(scores - mid).sum() > m:
            lo = mid
        else:
            hi = mid
    return _sigmoid(scores - (lo + hi) / 2.0)


def ampute(frame: Frame, config: AmputeConfig, seed: int) -> Frame:
    """Return a copy of ``frame`` with exactly round(prop * n) incomplete
    rows, each amputed by one pattern."""
    pred = frame.predictor_columns
    p = len(pred)
    if any(c.missing.any() for c in pred):
        raise InvalidConfigError("frame already contains missing cells")
    if len(config.patterns[0].mask) != p:
        raise SchemaError(
            f"pattern width {len(config.patterns[0].mask)} != {p} predictor columns")
    n = frame.n_rows
    m = int(np.rint(config.prop_incomplete * n))
    rng = np.random.default_rng(seed)
    n_pat = len(config.patterns)

    if m == 0:
        return frame

    pattern_of_row = rng.integers(0, n_pat, size=n)
    if config.mechanism == MCAR:
        rows = rng.choice(n, size=m, replace=False)
    else:
        vals = np.column_stack([c.values for c in pred])
        sd = vals.std(axis=0)
        z = np.where(sd > 0, (vals - vals.mean(axis=0)) / np.where(sd > 0, sd, 1.0), 0.0)
        if config.mar_weights is not None:
            weights = config.mar_weights
        else:
            weights = np.ones((n_pat, p))
        masks = np.stack([pat.mask for pat in config.patterns])   # (n_pat, p)
        w_obs = np.where(masks, 0.0, weights)                     # score observed cols only
        scores = (z * w_obs[pattern_of_row]).sum(axis=1)
        s_sd = scores.std()
        scores = (scores - scores.mean()) / (s_sd if s_sd > 0 else 1.0)
        sel = _mar_selection_weights(scores, m)
        rows = rng.choice(n, size=m, replace=False, p=sel / sel.sum())

    miss = np.zeros((n, p), dtype=bool)
    masks = np.stack([pat.mask for pat in config.patterns])
    miss[rows] = masks[pattern_of_row[rows]]

    cols = []
    j = 0
    for c in frame.columns:
        if c.name == frame.outcome_name:
            cols.append(c)
            continue
        cols.append(Column(c.name, c.kind, c.values, miss[:, j], c.levels))
        j += 1
    return Frame(tuple(cols), frame.outcome_name, frame.row_ids)
