"""Prediction models used downstream of imputation: LASSO with a
regularization path and internal v-fold CV, ordinary least squares, a
regression forest for mixed frames, and the R-squared metric.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import _kernels
from .errors import InvalidConfigError, MetricError, NumericError
from .frame import NOMINAL, Frame, make_folds

# When True the pure-python coordinate descent asserts per-sweep objective
# monotonicity (slow; test use only).
DEBUG_OBJECTIVE = False


@dataclass(frozen=True)
class LassoPath:
    lambdas: np.ndarray          # descending
    coefs: np.ndarray            # (n_lambda, p) on the original scale
    intercepts: np.ndarray       # (n_lambda,)
    converged: np.ndarray        # bool per lambda
    x_mean: np.ndarray
    x_sd: np.ndarray             # population sd; 0 marks constant columns
    y_mean: float

    def predict(self, X: np.ndarray, index: int) -> np.ndarray:
        return np.asarray(X) @ self.coefs[index] + self.intercepts[index]


@dataclass(frozen=True)
class LassoCvFit:
    path: LassoPath              # fit on all rows
    cv_rmse: np.ndarray          # pooled held-out RMSE per lambda
    chosen_index: int
    coef: np.ndarray             # at the chosen lambda, original scale
    intercept: float

    @property
    def chosen_lambda(self) -> float:
        return float(self.path.lambdas[self.chosen_index])

    def predict(self, X: np.ndarray) -> np.ndarray:
        return np.asarray(X) @ self.coef + self.intercept


def _standardize(X: np.ndarray, y: np.ndarray):
    n = len(y)
    x_mean = X.mean(axis=0)
    x_sd = np.sqrt(((X - x_mean) ** 2).mean(axis=0))
    keep = x_sd > 0
    Xs = np.zeros_like(X)
    Xs[:, keep] = (X[:, keep] - x_mean[keep]) / x_sd[keep]
    y_mean = float(y.mean())
    return Xs, x_mean, x_sd, keep, y_mean


def lambda_sequence(lam_max: float, n_lambda: int, ratio: float) -> np.ndarray:
    if lam_max <= 0:
        return np.zeros(n_lambda)
    return np.geomspace(lam_max, lam_max * ratio, n_lambda)


def lasso_path(X, y, n_lambda: int = 100,
               lambda_min_ratio: Optional[float] = None,
               lambdas: Optional[np.ndarray] = None,
               tol: float = 1e-7, max_sweeps: int = 100_000) -> LassoPath:
    """Cyclic coordinate descent along a descending lambda sequence with
    warm starts. Predictors are standardized internally; constant columns
    get coefficient 0. The head of the default sequence is the smallest
    penalty that zeroes every coefficient."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    n, p = X.shape
    if not (np.isfinite(X).all() and np.isfinite(y).all()):
        raise NumericError("non-finite values in the design or outcome")
    Xs, x_mean, x_sd, keep, y_mean = _standardize(X, y)
    yc = y - y_mean
    if lambdas is None:
        lam_max = float(np.abs(Xs.T @ yc).max() / n) if keep.any() else 0.0
        if lambda_min_ratio is None:
            lambda_min_ratio = 1e-4 if n > p else 1e-2
        lambdas = lambda_sequence(lam_max, n_lambda, lambda_min_ratio)
    lambdas = np.ascontiguousarray(lambdas, dtype=np.float64)
    betas_std, _, converged = _kernels.cd_path(
        Xs[:, keep], yc, lambdas, tol, max_sweeps,
        check_objective=DEBUG_OBJECTIVE)
    nl = len(lambdas)
    coefs = np.zeros((nl, p))
    coefs[:, keep] = betas_std / x_sd[keep]
    intercepts = y_mean - coefs @ x_mean
    return LassoPath(lambdas, coefs, intercepts, converged, x_mean, x_sd, y_mean)


def cv_lasso(X, y, v: int = 10, seed: int = 0, n_lambda: int = 100,
             lambda_min_ratio: Optional[float] = None) -> LassoCvFit:
    """Pick the penalty minimizing pooled held-out RMSE over v folds.

    One lambda sequence is computed on the full data and shared by every
    fold's path fit; the final coefficients are refit on all rows at the
    chosen penalty.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    n, p = X.shape
    if n < 2 * v:
        raise InvalidConfigError(f"need n >= 2v for {v}-fold CV, got n={n}")
    Xs, _, _, keep, y_mean = _standardize(X, y)
    lam_max = float(np.abs(Xs.T @ (y - y_mean)).max() / n) if keep.any() else 0.0
    if lambda_min_ratio is None:
        lambda_min_ratio = 1e-4 if n > p else 1e-2
    lambdas = lambda_sequence(lam_max, 100 if n_lambda is None else n_lambda,
                              lambda_min_ratio)

    plan = make_folds(n, v, seed)
    sq_err = np.zeros(len(lambdas))
    for fold in range(v):
        hold = plan.assignment == fold
        path = lasso_path(X[~hold], y[~hold], lambdas=lambdas)
        preds = X[hold] @ path.coefs.T + path.intercepts  # (n_hold, nl)
        sq_err += ((preds - y[hold][:, None]) ** 2).sum(axis=0)
    cv_rmse = np.sqrt(sq_err / n)
    chosen = int(np.argmin(cv_rmse))
    full = lasso_path(X, y, lambdas=lambdas)
    return LassoCvFit(full, cv_rmse, chosen, full.coefs[chosen],
                      float(full.intercepts[chosen]))


def ols_fit(X, y) -> tuple[np.ndarray, float]:
    """Least squares with intercept; rank-deficient designs get the
    minimum-norm solution."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if not (np.isfinite(X).all() and np.isfinite(y).all()):
        raise NumericError("non-finite values in the design or outcome")
    x_mean = X.mean(axis=0)
    y_mean = float(y.mean())
    coef, *_ = np.linalg.lstsq(X - x_mean, y - y_mean, rcond=None)
    return coef, y_mean - float(x_mean @ coef)


def r_squared(y_true, y_pred) -> float:
    """1 - SSE/SST; may be negative for predictions worse than the mean."""
    y_true = np.asarray(y_true, dtype=np.float64)
    y_pred = np.asarray(y_pred, dtype=np.float64)
    if len(y_true) != len(y_pred) or len(y_true) < 2:
        raise MetricError("need equal-length vectors with at least 2 entries")
    sst = float(((y_true - y_true.mean()) ** 2).sum())
    if sst == 0:
        raise MetricError("R^2 undefined for a constant y_true")
    sse = float(((y_true - y_pred) ** 2).sum())
    return 1.0 - sse / sst


def design_matrix(predictors: Frame) -> np.ndarray:
    """Numeric design for linear models: numeric columns pass through,
    nominal columns expand to one indicator per declared level (min-norm /
    penalized solvers absorb the redundancy)."""
    blocks = []
    for c in predictors.predictor_columns:
        if c.missing.any():
            raise InvalidConfigError("design requires fully imputed predictors")
        if c.kind == NOMINAL:
            eye = np.eye(len(c.levels))
            blocks.append(eye[c.values])
        else:
            blocks.append(c.values[:, None])
    return np.hstack(blocks)


# ---------------------------------------------------------------------------
# Regression forest for mixed frames
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ForestConfig:
    n_trees: int = 500
    mtry: Optional[int] = None     # default ceil(p / 3)
    min_leaf: int = 5
    seed: int = 0


@dataclass(frozen=True)
class ForestFit:
    trees: tuple
    nominal: np.ndarray
    names: tuple[str, ...]
    y_min: float
    y_max: float
    config: ForestConfig


def _build_tree(vals, nominal, y, idx, mtry, min_leaf, rng):
    node_y = y[idx]
    mean = float(node_y.mean())
    if len(idx) <= min_leaf or node_y.var() == 0.0:
        return ("leaf", mean)
    p = vals.shape[1]
    feats = rng.choice(p, size=min(mtry, p), replace=False)
    best = None  # (sse, j, kind, threshold/level)
    for j in feats:
        x = vals[idx, j]
        if nominal[j]:
            for lev in np.unique(x):
                left = x == lev
                nl = int(left.sum())
                if nl == 0 or nl == len(idx):
                    continue
                yl, yr = node_y[left], node_y[~left]
                sse = yl.var() * len(yl) + yr.var() * len(yr)
                if best is None or sse < best[0]:
                    best = (sse, j, "nom", float(lev))
        else:
            order = np.argsort(x, kind="stable")
            xs, ys = x[order], node_y[order]
            csum = np.cumsum(ys)
            csq = np.cumsum(ys ** 2)
            total, total_sq = csum[-1], csq[-1]
            m = len(idx)
            for i in range(m - 1):
                if xs[i] == xs[i + 1]:
                    continue
                nl = i + 1
                sl, sql = csum[i], csq[i]
                sse = (sql - sl * sl / nl) + \
                      ((total_sq - sql) - (total - sl) ** 2 / (m - nl))
                if best is None or sse < best[0]:
                    best = (sse, j, "num", (xs[i] + xs[i + 1]) / 2.0)
    if best is None:
        return ("leaf", mean)
    _, j, kind, thr = best
    x = vals[idx, j]
    left = (x == thr) if kind == "nom" else (x <= thr)
    lt = _build_tree(vals, nominal, y, idx[left], mtry, min_leaf, rng)
    rt = _build_tree(vals, nominal, y, idx[~left], mtry, min_leaf, rng)
    return (kind, j, thr, lt, rt)


def _tree_predict(tree, vals):
    out = np.empty(len(vals))
    stack = [(tree, np.arange(len(vals)))]
    while stack:
        node, idx = stack.pop()
        if node[0] == "leaf":
            out[idx] = node[1]
            continue
        kind, j, thr, lt, rt = node
        x = vals[idx, j]
        left = (x == thr) if kind == "nom" else (x <= thr)
        stack.append((lt, idx[left]))
        stack.append((rt, idx[~left]))
    return out


def forest_fit(predictors: Frame, y, config: ForestConfig = ForestConfig()) -> ForestFit:
    """Bagged variance-minimizing regression trees on a mixed frame.

    Numeric columns split on midpoints, nominal columns one-level-vs-rest.
    Per-tree seeds derive from (seed, tree index), so results do not depend
    on any parallel schedule.
    """
    y = np.asarray(y, dtype=np.float64)
    if predictors.n_rows == 0 or len(y) != predictors.n_rows:
        raise InvalidConfigError("empty data or outcome length mismatch")
    if predictors.n_missing_cells() > 0:
        raise InvalidConfigError("forest requires fully imputed predictors")
    vals, _, nominal, _, names = predictors.predictor_arrays()
    p = vals.shape[1]
    mtry = config.mtry if config.mtry is not None else math.ceil(p / 3)
    n = len(y)
    trees = []
    for t in range(config.n_trees):
        rng = np.random.default_rng((config.seed, t))
        boot = rng.integers(0, n, size=n)
        trees.append(_build_tree(vals[boot], nominal, y[boot],
                                 np.arange(n), mtry, config.min_leaf, rng))
    return ForestFit(tuple(trees), nominal, tuple(names),
                     float(y.min()), float(y.max()), config)


def forest_predict(fit: ForestFit, predictors: Frame) -> np.ndarray:
    if predictors.n_missing_cells() > 0:
        raise InvalidConfigError("forest requires fully imputed predictors")
    vals, _, _, _, _ = predictors.predictor_arrays()
    acc = np.zeros(len(vals))
    for tree in fit.trees:
        acc += _tree_predict(tree, vals)
    return acc / len(fit.trees)
