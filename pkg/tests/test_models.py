"""LASSO path against closed-form oracles, OLS against the normal
equations, metric edge cases, and forest sanity checks."""

import numpy as np
import pytest

import mdcv.models as models
from mdcv.errors import InvalidConfigError, MetricError, NumericError
from mdcv.frame import Column, Frame
from mdcv.models import (ForestConfig, cv_lasso, design_matrix, forest_fit,
                         forest_predict, lambda_sequence, lasso_path, ols_fit,
                         r_squared)


def soft(z, g):
    return np.sign(z) * np.maximum(np.abs(z) - g, 0.0)


def orthonormal_problem(n, p, seed):
    """Design with X'X/n = I after internal standardization, so the path
    has the exact closed form beta_j(lambda) = S(x_j'y/n, lambda)."""
    rng = np.random.default_rng(seed)
    # QR against an intercept column: the remaining columns come out
    # orthonormal AND mean-zero, so X'X/n = I after sd-1 scaling
    a = np.column_stack([np.ones(n), rng.normal(size=(n, p))])
    q, _ = np.linalg.qr(a)
    X = q[:, 1:] * np.sqrt(n)
    beta = rng.normal(size=p)
    y = X @ beta + 0.3 * rng.normal(size=n)
    return X, y


class TestLassoOracles:
    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_soft_threshold_closed_form(self, seed):
        n, p = 60, 5
        X, y = orthonormal_problem(n, p, seed)
        g = X.T @ X / n
        assert np.allclose(g, np.eye(p), atol=1e-10)
        path = lasso_path(X, y, n_lambda=20)
        yc = y - y.mean()
        z = X.T @ yc / n
        for i, lam in enumerate(path.lambdas):
            np.testing.assert_allclose(path.coefs[i], soft(z, lam), atol=1e-6)

    @pytest.mark.parametrize("seed", [3, 4])
    def test_lambda_zero_limit_matches_ols(self, seed):
        rng = np.random.default_rng(seed)
        n, p = 200, 8
        X = rng.normal(size=(n, p))
        y = X @ rng.normal(size=p) + rng.normal(size=n)
        path = lasso_path(X, y, lambdas=np.array([1e-10]), tol=1e-12)
        coef, intercept = ols_fit(X, y)
        np.testing.assert_allclose(path.coefs[0], coef, atol=1e-5)
        assert path.intercepts[0] == pytest.approx(intercept, abs=1e-5)

    def test_kkt_conditions(self):
        """Stationarity of the standardized problem at every lambda:
        |gradient| <= lambda off-support, gradient = -lambda*sign on it."""
        rng = np.random.default_rng(11)
        failures = 0
        for trial in range(100):
            n = int(rng.integers(30, 120))
            p = int(rng.integers(2, 25))
            X = rng.normal(size=(n, p)) * rng.uniform(0.5, 3.0, size=p)
            y = X[:, 0] + rng.normal(size=n)
            path = lasso_path(X, y, n_lambda=12)
            Xs, _, x_sd, keep, y_mean = models._standardize(X, y)
            yc = y - y_mean
            for i, lam in enumerate(path.lambdas):
                b = path.coefs[i][keep] * x_sd[keep]  # standardized scale
                grad = Xs[:, keep].T @ (Xs[:, keep] @ b - yc) / n
                on = b != 0
                if not np.all(np.abs(grad[~on]) <= lam + 1e-6):
                    failures += 1
                elif not np.allclose(grad[on], -lam * np.sign(b[on]), atol=1e-6):
                    failures += 1
        assert failures == 0

    def test_path_objective_never_increases(self):
        rng = np.random.default_rng(5)
        X = rng.normal(size=(50, 10))
        y = rng.normal(size=50)
        models.DEBUG_OBJECTIVE = True
        try:
            import mdcv._kernels as _k
            _gw, cd_py = _k.get_backend("pure")
            Xs, _, _, keep, y_mean = models._standardize(X, y)
            lam_max = np.abs(Xs.T @ (y - y_mean)).max() / 50
            lambdas = np.geomspace(lam_max, lam_max * 1e-3, 20)
            cd_py.cd_path(Xs, y - y_mean, lambdas, 1e-7, 100_000, True)
        finally:
            models.DEBUG_OBJECTIVE = False

    def test_lambda_max_zeroes_everything(self):
        rng = np.random.default_rng(6)
        X = rng.normal(size=(40, 6))
        y = X[:, 2] + 0.1 * rng.normal(size=40)
        path = lasso_path(X, y)
        assert np.all(path.coefs[0] == 0.0)
        assert path.intercepts[0] == pytest.approx(y.mean())
        assert np.any(path.coefs[1] != 0)  # and the head is not slack

    def test_constant_column_gets_zero(self):
        rng = np.random.default_rng(7)
        X = rng.normal(size=(50, 3))
        X[:, 1] = 4.2
        y = X[:, 0] + rng.normal(size=50)
        path = lasso_path(X, y)
        assert np.all(path.coefs[:, 1] == 0.0)

    def test_non_finite_rejected(self):
        X = np.ones((10, 2))
        X[0, 0] = np.nan
        with pytest.raises(NumericError):
            lasso_path(X, np.ones(10))


class TestCvLasso:
    def test_deterministic_and_seed_sensitive(self):
        rng = np.random.default_rng(8)
        X = rng.normal(size=(80, 10))
        y = X[:, 0] - X[:, 3] + rng.normal(size=80)
        a = cv_lasso(X, y, seed=1)
        b = cv_lasso(X, y, seed=1)
        assert a.chosen_index == b.chosen_index
        np.testing.assert_array_equal(a.cv_rmse, b.cv_rmse)

    def test_recovers_signal_support(self):
        rng = np.random.default_rng(9)
        X = rng.normal(size=(300, 12))
        y = 2.0 * X[:, 0] - 1.5 * X[:, 5] + 0.5 * rng.normal(size=300)
        fit = cv_lasso(X, y, seed=0)
        assert abs(fit.coef[0] - 2.0) < 0.1
        assert abs(fit.coef[5] + 1.5) < 0.1
        assert np.sum(np.abs(fit.coef[[1, 2, 3, 4, 6, 7, 8, 9, 10, 11]]) > 0.1) == 0

    def test_rmse_is_pooled_over_folds(self):
        """Pooled RMSE = sqrt(total held-out SSE / n), recomputed here by
        refitting each fold's path directly."""
        rng = np.random.default_rng(10)
        X = rng.normal(size=(60, 5))
        y = X[:, 1] + rng.normal(size=60)
        fit = cv_lasso(X, y, v=5, seed=3)
        from mdcv.frame import make_folds
        plan = make_folds(60, 5, seed=3)
        sse = np.zeros(len(fit.path.lambdas))
        for fold in range(5):
            hold = plan.assignment == fold
            p = lasso_path(X[~hold], y[~hold], lambdas=fit.path.lambdas)
            pred = X[hold] @ p.coefs.T + p.intercepts
            sse += ((pred - y[hold][:, None]) ** 2).sum(axis=0)
        np.testing.assert_allclose(fit.cv_rmse, np.sqrt(sse / 60), rtol=1e-12)
        assert fit.chosen_index == int(np.argmin(fit.cv_rmse))

    def test_too_few_rows(self):
        with pytest.raises(InvalidConfigError):
            cv_lasso(np.ones((15, 2)), np.ones(15), v=10)


class TestOlsAndMetric:
    def test_normal_equations_oracle(self):
        rng = np.random.default_rng(12)
        X = rng.normal(size=(40, 4))
        y = rng.normal(size=40)
        coef, intercept = ols_fit(X, y)
        Z = np.column_stack([np.ones(40), X])
        want = np.linalg.solve(Z.T @ Z, Z.T @ y)
        np.testing.assert_allclose(coef, want[1:], atol=1e-10)
        assert intercept == pytest.approx(want[0], abs=1e-10)

    def test_rank_deficient_min_norm(self):
        rng = np.random.default_rng(13)
        X = rng.normal(size=(30, 3))
        X = np.column_stack([X, X[:, 0]])  # duplicated column
        y = X[:, 0] + rng.normal(size=30)
        coef, intercept = ols_fit(X, y)
        assert np.isfinite(coef).all()
        assert coef[0] == pytest.approx(coef[3], abs=1e-8)  # split evenly

    def test_r_squared(self):
        y = np.array([1.0, 2.0, 3.0])
        assert r_squared(y, y) == 1.0
        assert r_squared(y, np.full(3, 2.0)) == 0.0
        assert r_squared(y, np.array([3.0, 1.0, 2.0])) < 0
        with pytest.raises(MetricError):
            r_squared(np.full(3, 5.0), y)
        with pytest.raises(MetricError):
            r_squared(y, y[:2])

    def test_lambda_sequence_shape(self):
        s = lambda_sequence(2.0, 10, 0.01)
        assert s[0] == 2.0 and s[-1] == pytest.approx(0.02)
        assert np.all(np.diff(s) < 0)
        assert np.all(lambda_sequence(0.0, 5, 0.01) == 0.0)


def mixed_design(n, seed):
    rng = np.random.default_rng(seed)
    x = Column.numeric("x", rng.normal(size=n))
    g = Column.nominal("g", rng.integers(0, 3, size=n), levels=("a", "b", "c"))
    frame = Frame((x, g))
    y = 2.0 * x.values + np.where(g.values == 1, 3.0, 0.0) + \
        0.2 * rng.normal(size=n)
    return frame, y


class TestForest:
    def test_fits_mixed_signal(self):
        frame, y = mixed_design(400, seed=14)
        fit = forest_fit(frame, y, ForestConfig(n_trees=60, seed=0))
        pred = forest_predict(fit, frame)
        assert r_squared(y, pred) > 0.85

    def test_deterministic(self):
        frame, y = mixed_design(100, seed=15)
        cfg = ForestConfig(n_trees=10, seed=7)
        a = forest_predict(forest_fit(frame, y, cfg), frame)
        b = forest_predict(forest_fit(frame, y, cfg), frame)
        np.testing.assert_array_equal(a, b)

    def test_predictions_within_outcome_hull(self):
        frame, y = mixed_design(150, seed=16)
        fit = forest_fit(frame, y, ForestConfig(n_trees=20, seed=1))
        pred = forest_predict(fit, frame)
        assert pred.min() >= y.min() and pred.max() <= y.max()

    def test_rejects_missing_cells(self):
        x = Column.numeric("x", [1.0, np.nan, 3.0], missing=[False, True, False])
        frame = Frame((x,))
        with pytest.raises(InvalidConfigError):
            forest_fit(frame, np.zeros(3))


def test_design_matrix_one_hot():
    frame, _ = mixed_design(10, seed=17)
    X = design_matrix(frame)
    assert X.shape == (10, 4)
    np.testing.assert_array_equal(X[:, 1:].sum(axis=1), np.ones(10))
