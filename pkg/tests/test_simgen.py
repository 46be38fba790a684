import numpy as np
import pytest

from mdcv.errors import InvalidConfigError
from mdcv.simgen import (DEFAULT_BETA, GenConfig, ar1_covariance, generate,
                         mvn_ar1_sample, population_r_squared)


class TestAr1Sampler:
    def test_rho_zero_is_iid(self):
        X = mvn_ar1_sample(50_000, 3, rho=0.0, seed=1)
        c = np.corrcoef(X.T)
        assert np.abs(c - np.eye(3)).max() < 0.02

    def test_monte_carlo_matches_analytic_covariance(self):
        """Sample correlations vs rho^|i-j| at rho=0.75: 0.75 and 0.5625."""
        X = mvn_ar1_sample(100_000, 3, rho=0.75, seed=2)
        c = np.corrcoef(X.T)
        want = ar1_covariance(3, 0.75)
        assert np.abs(c - want).max() < 0.01
        assert want[0, 1] == 0.75
        assert want[0, 2] == 0.5625

    def test_negative_rho(self):
        X = mvn_ar1_sample(100_000, 2, rho=-0.5, seed=3)
        assert np.corrcoef(X.T)[0, 1] == pytest.approx(-0.5, abs=0.01)

    def test_unit_marginal_variance(self):
        X = mvn_ar1_sample(100_000, 5, rho=0.9, seed=4)
        assert np.abs(X.var(axis=0) - 1.0).max() < 0.02

    def test_invalid_rho(self):
        with pytest.raises(InvalidConfigError):
            mvn_ar1_sample(10, 2, rho=1.0, seed=0)


class TestPopulationR2:
    def test_derived_value_default_design(self):
        # beta' Sigma beta for the default beta and rho=3/4, computed
        # independently via the quadratic form
        beta = np.asarray(DEFAULT_BETA)
        signal = beta @ ar1_covariance(10, 0.75) @ beta
        assert population_r_squared(DEFAULT_BETA, 0.75, 1.0) == \
            pytest.approx(signal / (signal + 1.0))
        assert population_r_squared(DEFAULT_BETA, 0.75, 1.0) == \
            pytest.approx(0.896, abs=0.001)

    def test_monotone_in_noise(self):
        r = [population_r_squared(DEFAULT_BETA, 0.75, s) for s in (1, 3, 10)]
        assert r[0] > r[1] > r[2]


class TestGenerate:
    def test_outcome_is_linear_in_true_predictors(self):
        """Residual y - X beta must be iid N(0, sigma^2), independent of
        junk: regression of the residual on all columns finds nothing."""
        cfg = GenConfig(n_train=20_000, n_valid=10, sigma_eps=2.0)
        data = generate(cfg, seed=5)
        X = np.column_stack([data.train.column(f"x{j+1}").values
                             for j in range(10)])
        y = data.train.outcome()
        resid = y - X @ np.asarray(DEFAULT_BETA)
        assert resid.std() == pytest.approx(2.0, rel=0.03)
        J = np.column_stack([data.train.column(f"junk{j+1}").values
                             for j in range(10)])
        assert np.abs(np.corrcoef(resid, J.T)[0, 1:]).max() < 0.03

    def test_junk_unrelated_to_outcome(self):
        data = generate(GenConfig(n_train=50_000, n_valid=10), seed=6)
        y = data.train.outcome()
        for j in range(10):
            r = np.corrcoef(y, data.train.column(f"junk{j+1}").values)[0, 1]
            assert abs(r) < 0.02

    def test_schema(self):
        data = generate(GenConfig(n_train=30, n_valid=20, n_junk=3), seed=7)
        assert data.train.n_rows == 30 and data.valid.n_rows == 20
        assert data.train.same_schema(data.valid)
        assert [c.name for c in data.train.columns] == \
            ["y"] + [f"x{j+1}" for j in range(10)] + \
            [f"junk{j+1}" for j in range(3)]
        assert data.train.n_missing_cells() == 0
        assert data.train_groups is None

    def test_deterministic(self):
        a = generate(GenConfig(n_train=40, n_valid=15), seed=8)
        b = generate(GenConfig(n_train=40, n_valid=15), seed=8)
        np.testing.assert_array_equal(a.train.outcome(), b.train.outcome())

    def test_s2_exposes_groups_s3_hides_them(self):
        cfg2 = GenConfig(n_train=100, n_valid=50, scenario="S2")
        cfg3 = GenConfig(n_train=100, n_valid=50, scenario="S3")
        d2 = generate(cfg2, seed=9)
        d3 = generate(cfg3, seed=9)
        assert d2.train_groups is not None
        assert len(np.unique(d2.train_groups)) == 10
        assert d3.train_groups is None
        # identical data either way: the scenarios differ only in labeling
        np.testing.assert_array_equal(d2.train.outcome(), d3.train.outcome())
        np.testing.assert_array_equal(d2.valid.column("x1").values,
                                      d3.valid.column("x1").values)

    def test_s2_group_offsets_shift_column_means(self):
        cfg = GenConfig(n_train=5000, n_valid=5000, scenario="S2",
                        group_mean_sd=5.0)
        d = generate(cfg, seed=10)
        x1 = d.train.column("x1").values
        group_means = [x1[d.train_groups == g].mean() for g in range(10)]
        assert np.std(group_means) > 1.0  # far above iid noise
        # the validation set is one further group: a single common offset,
        # so its column mean sits far from zero for sd=5 (this seed: ~7)
        assert abs(d.valid.column("x1").values.mean()) > 1.0

    def test_s1_has_no_group_structure(self):
        d = generate(GenConfig(n_train=5000, n_valid=10), seed=11)
        x1 = d.train.column("x1").values
        assert abs(x1.mean()) < 0.1

    def test_row_ids_disjoint(self):
        d = generate(GenConfig(n_train=25, n_valid=30), seed=12)
        assert len(np.intersect1d(d.train.row_ids, d.valid.row_ids)) == 0

    def test_config_validation(self):
        with pytest.raises(InvalidConfigError):
            GenConfig(n_train=100, sigma_eps=0.0)
        with pytest.raises(InvalidConfigError):
            GenConfig(n_train=100, rho=1.5)
        with pytest.raises(InvalidConfigError):
            GenConfig(n_train=100, scenario="S9")
        with pytest.raises(InvalidConfigError):
            GenConfig(n_train=100, scenario="S2", n_groups=1)
        with pytest.raises(InvalidConfigError):
            GenConfig(n_train=1)
