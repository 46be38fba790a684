"""The two orderings of imputation and cross-validation, k-grid tuning, and
the finalize-then-externally-validate pipeline.

``estimate_during`` (imputation inside each CV fold) fits one imputer per
fold on the analysis rows only and imputes the held-out assessment rows from
it. ``estimate_before`` fits a single imputer on the whole training set,
imputes it once per k, and then cuts the same folds from the imputed data.
Both accumulate residual and fold-centered total sums of squares over the
held-out folds and score once from the aggregates, so for a shared fold
plan every difference in their estimates is attributable to the imputation
ordering alone.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import InvalidConfigError
from .frame import Frame, FoldPlan, make_folds, split
from .impute import fit_knn, grid_transform
from .models import (ForestConfig, cv_lasso, design_matrix, forest_fit,
                     forest_predict, ols_fit, r_squared)
from .util import mix_seed

DURING_CV = "during"    # imputer refit inside every fold
BEFORE_CV = "before"    # one imputer on the full training set, folds cut after

WORKFLOWS = (DURING_CV, BEFORE_CV)


class LassoCvModel:
    """cv.glmnet-style model: inner v-fold CV picks the penalty.

    The inner fold count adapts to small analysis sets: v = min(10, n // 2).
    """

    def __init__(self, v: int = 10):
        self.v = v

    def fit(self, predictors: Frame, y: np.ndarray, seed: int):
        X = design_matrix(predictors)
        v = min(self.v, len(y) // 2)
        if v < 2:
            raise InvalidConfigError("analysis set too small for inner CV")
        fit = cv_lasso(X, y, v=v, seed=seed)
        return _LinearPredictor(fit.coef, fit.intercept, fit.chosen_lambda)


class OlsModel:
    def fit(self, predictors: Frame, y: np.ndarray, seed: int):
        X = design_matrix(predictors)
        coef, intercept = ols_fit(X, y)
        return _LinearPredictor(coef, intercept, None)


class _LinearPredictor:
    def __init__(self, coef, intercept, chosen_lambda):
        self.coef = coef
        self.intercept = intercept
        self.chosen_lambda = chosen_lambda

    def predict(self, predictors: Frame) -> np.ndarray:
        return design_matrix(predictors) @ self.coef + self.intercept


class ForestModel:
    def __init__(self, config: ForestConfig = ForestConfig()):
        self.config = config

    def fit(self, predictors: Frame, y: np.ndarray, seed: int):
        cfg = ForestConfig(self.config.n_trees, self.config.mtry,
                           self.config.min_leaf, seed)
        fit = forest_fit(predictors, y, cfg)
        return _ForestPredictor(fit)


class _ForestPredictor:
    chosen_lambda = None

    def __init__(self, fit):
        self.fit = fit

    def predict(self, predictors: Frame) -> np.ndarray:
        return forest_predict(self.fit, predictors)


@dataclass
class PerKEstimates:
    """Cross-validated performance per k, pooled over folds, plus timings."""

    workflow: str
    ks: np.ndarray               # ascending
    r2: np.ndarray
    rmse: np.ndarray
    impute_seconds: float
    model_seconds: float
    n_imputer_fits: int
    plan_seed: Optional[int] = None

    @property
    def chosen_k(self) -> int:
        # first index on ties = smallest k (ks ascending)
        return int(self.ks[int(np.argmin(self.rmse))])


@dataclass
class FinalReport:
    workflow: str
    chosen_k: int
    chosen_lambda: Optional[float]
    external_r2: float           # never touched during training or tuning
    ks: np.ndarray
    true_r2_curve: np.ndarray    # true external R^2 at every k
    estimates: PerKEstimates


def _fold_ss(y: np.ndarray, pred: np.ndarray) -> tuple[float, float]:
    """Residual and fold-centered total sums of squares for one held-out
    fold. Totals are summed across folds before the final 1 - SSres/SStot,
    which keeps tiny assessment folds from dominating, and centering within
    the fold keeps between-fold outcome shifts (grouped folds) out of the
    denominator. SStot is rescaled by n / (n - 1) so it estimates n times
    the fold variance without the downward bias of centering at the fold's
    own sample mean; without this, 10-row assessment folds understate the
    denominator by ~10% and drag the score down."""
    n = y.size
    ss_res = float(((y - pred) ** 2).sum())
    ss_tot = float(((y - y.mean()) ** 2).sum())
    if n > 1:
        ss_tot *= n / (n - 1)
    return ss_res, ss_tot


def _cv_score(imputed_by_k: dict[int, Frame], plan: FoldPlan, seed: int,
              model) -> tuple[np.ndarray, np.ndarray, float]:
    """Shared outer-CV scoring loop over already-imputed per-k datasets."""
    ks = sorted(imputed_by_k)
    n = imputed_by_k[ks[0]].n_rows
    ss = {k: np.zeros(2) for k in ks}
    t0 = time.perf_counter()
    for fold in range(plan.v):
        inner_seed = mix_seed(seed, fold)
        for k in ks:
            analysis, assessment = split(imputed_by_k[k], plan, fold)
            fitted = model.fit(analysis, analysis.outcome(), inner_seed)
            pred = fitted.predict(assessment)
            ss[k] += _fold_ss(assessment.outcome(), pred)
    model_seconds = time.perf_counter() - t0
    r2 = np.array([1.0 - ss[k][0] / ss[k][1] for k in ks])
    rmse = np.array([float(np.sqrt(ss[k][0] / n)) for k in ks])
    return r2, rmse, model_seconds


def estimate_during(train: Frame, ks: Sequence[int], plan: FoldPlan,
                    seed: int, model=None) -> PerKEstimates:
    """Imputation inside each fold: the fold's imputer sees analysis rows
    only, and the assessment rows are imputed from those donors."""
    model = model if model is not None else LassoCvModel()
    ks = sorted(int(k) for k in set(ks))
    n = train.n_rows
    ss = {k: np.zeros(2) for k in ks}
    impute_seconds = 0.0
    model_seconds = 0.0
    n_fits = 0
    for fold in range(plan.v):
        analysis, assessment = split(train, plan, fold)
        t0 = time.perf_counter()
        imputer = fit_knn(analysis, max(ks))
        n_fits += 1
        analysis_by_k = grid_transform(imputer, None, ks)
        assessment_by_k = grid_transform(imputer, assessment, ks)
        impute_seconds += time.perf_counter() - t0
        inner_seed = mix_seed(seed, fold)
        y_hold = assessment.outcome()
        t0 = time.perf_counter()
        for k in ks:
            fitted = model.fit(analysis_by_k[k], analysis_by_k[k].outcome(),
                               inner_seed)
            pred = fitted.predict(assessment_by_k[k])
            ss[k] += _fold_ss(y_hold, pred)
        model_seconds += time.perf_counter() - t0
    # aggregated identically to _cv_score so the two workflows are exactly
    # comparable
    r2 = np.array([1.0 - ss[k][0] / ss[k][1] for k in ks])
    rmse = np.array([float(np.sqrt(ss[k][0] / n)) for k in ks])
    return PerKEstimates(DURING_CV, np.array(ks), r2, rmse,
                         impute_seconds, model_seconds, n_fits, seed)


def estimate_before(train: Frame, ks: Sequence[int], plan: FoldPlan,
                    seed: int, model=None) -> PerKEstimates:
    """Imputation before CV: all training rows act as donors once, then the
    identical fold loop runs on each fully imputed dataset."""
    model = model if model is not None else LassoCvModel()
    ks = sorted(int(k) for k in set(ks))
    t0 = time.perf_counter()
    imputer = fit_knn(train, max(ks))
    imputed_by_k = grid_transform(imputer, None, ks)
    impute_seconds = time.perf_counter() - t0
    r2, rmse, model_seconds = _cv_score(imputed_by_k, plan, seed, model)
    return PerKEstimates(BEFORE_CV, np.array(ks), r2, rmse,
                         impute_seconds, model_seconds, 1, seed)


def finalize_curve(train: Frame, test: Frame, ks: Sequence[int], seed: int,
                   model=None):
    """Per-k finalize sweep: impute the full training set at k, fit, impute
    the test set from full-training donors (approach 1), score externally.

    Returns (ks ascending, true external R^2 per k, chosen lambda per k).
    The curve is workflow-independent: finalization always uses the full
    training set as donor pool.
    """
    model = model if model is not None else LassoCvModel()
    ks = sorted(int(k) for k in set(ks))
    imputer = fit_knn(train, max(ks))
    train_by_k = grid_transform(imputer, None, ks)
    test_by_k = grid_transform(imputer, test, ks)
    y_test = test.outcome()
    r2 = np.empty(len(ks))
    lambdas = np.full(len(ks), np.nan)
    # one seed across the k grid: identical imputed data per k must give
    # identical fits, so curve differences are purely data-driven
    fit_seed = mix_seed(seed, 0xF1AA)
    for i, k in enumerate(ks):
        fitted = model.fit(train_by_k[k], train_by_k[k].outcome(), fit_seed)
        r2[i] = r_squared(y_test, fitted.predict(test_by_k[k]))
        if fitted.chosen_lambda is not None:
            lambdas[i] = fitted.chosen_lambda
    return np.array(ks), r2, lambdas


def tune_and_finalize(train: Frame, test: Frame, ks: Sequence[int],
                      workflow: str, v: int = 10, seed: int = 0,
                      plan: Optional[FoldPlan] = None,
                      model=None) -> FinalReport:
    """Choose k with the requested workflow, then finalize on the full
    training set and validate externally on ``test``."""
    if workflow not in WORKFLOWS:
        raise InvalidConfigError(f"unknown workflow {workflow!r}")
    model = model if model is not None else LassoCvModel()
    if plan is None:
        plan = make_folds(train.n_rows, v, mix_seed(seed, 0xF01D))
    estimator = estimate_during if workflow == DURING_CV else estimate_before
    est = estimator(train, ks, plan, seed, model)
    ks_arr, curve, lambdas = finalize_curve(train, test, ks, seed, model)
    chosen_k = est.chosen_k
    i = int(np.flatnonzero(ks_arr == chosen_k)[0])
    lam = None if np.isnan(lambdas[i]) else float(lambdas[i])
    return FinalReport(workflow, chosen_k, lam, float(curve[i]),
                       ks_arr, curve, est)
