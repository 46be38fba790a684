"""Simulated training/validation data: AR(1)-correlated true predictors,
independent junk predictors, linear outcome, and three population scenarios
(iid; grouped with observed labels; grouped with latent labels).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import InvalidConfigError
from .frame import Column, Frame

DEFAULT_BETA = (-1.00, -0.78, -0.56, -0.33, -0.11, 0.11, 0.33, 0.56, 0.78, 1.00)

S1, S2, S3 = "S1", "S2", "S3"


@dataclass(frozen=True)
class GenConfig:
    n_train: int
    n_valid: int = 10_000
    beta: tuple[float, ...] = DEFAULT_BETA
    rho: float = 0.75
    sigma_eps: float = 1.0
    n_junk: int = 10
    scenario: str = S1
    n_groups: int = 11
    group_mean_sd: float = 1.0

    def __post_init__(self):
        if not abs(self.rho) < 1:
            raise InvalidConfigError("|rho| must be < 1")
        if self.sigma_eps <= 0:
            raise InvalidConfigError("sigma_eps must be > 0")
        if self.n_junk < 0:
            raise InvalidConfigError("n_junk must be >= 0")
        if self.scenario not in (S1, S2, S3):
            raise InvalidConfigError(f"unknown scenario {self.scenario!r}")
        if self.scenario != S1 and self.n_groups < 2:
            raise InvalidConfigError("grouped scenarios need n_groups >= 2")
        if self.n_train < 2 or self.n_valid < 2:
            raise InvalidConfigError("need at least 2 rows per set")


@dataclass(frozen=True)
class GeneratedData:
    train: Frame
    valid: Frame
    train_groups: Optional[np.ndarray]   # exposed under S2 only


def _ar1(rng: np.random.Generator, n: int, p: int, rho: float) -> np.ndarray:
    # closed-form AR(1) recursion; exactly the rho^|i-j| covariance
    z = rng.standard_normal((n, p))
    x = np.empty((n, p))
    x[:, 0] = z[:, 0]
    scale = np.sqrt(1.0 - rho * rho)
    for j in range(1, p):
        x[:, j] = rho * x[:, j - 1] + scale * z[:, j]
    return x


def mvn_ar1_sample(n: int, p: int, rho: float, seed: int) -> np.ndarray:
    """iid rows from a zero-mean MVN with covariance rho^|i-j|."""
    if not abs(rho) < 1:
        raise InvalidConfigError("|rho| must be < 1")
    if p < 1:
        raise InvalidConfigError("p must be >= 1")
    return _ar1(np.random.default_rng(seed), n, p, rho)


def ar1_covariance(p: int, rho: float) -> np.ndarray:
    idx = np.arange(p)
    return rho ** np.abs(idx[:, None] - idx[None, :])


def population_r_squared(beta, rho: float, sigma_eps: float = 1.0) -> float:
    """Complete-data R^2 of the true linear predictor under the AR(1) design."""
    beta = np.asarray(beta, dtype=np.float64)
    signal = float(beta @ ar1_covariance(len(beta), rho) @ beta)
    return signal / (signal + sigma_eps ** 2)


def _make_frame(X, junk, y, row_ids) -> Frame:
    cols = [Column.numeric("y", y)]
    for j in range(X.shape[1]):
        cols.append(Column.numeric(f"x{j + 1}", X[:, j]))
    for j in range(junk.shape[1]):
        cols.append(Column.numeric(f"junk{j + 1}", junk[:, j]))
    return Frame(tuple(cols), "y", row_ids)


def generate(config: GenConfig, seed: int) -> GeneratedData:
    """One replicate's training and validation frames.

    Under S2/S3, every group (10 training groups plus one holding the whole
    validation set) adds its own mean-offset vector to all predictor and
    junk columns; y responds through the offset true predictors. S2 and S3
    draw identical data for identical seeds and differ only in whether the
    training group labels are exposed.
    """
    rng = np.random.default_rng(seed)
    p_true = len(config.beta)
    beta = np.asarray(config.beta)

    X_tr = _ar1(rng, config.n_train, p_true, config.rho)
    X_va = _ar1(rng, config.n_valid, p_true, config.rho)
    J_tr = rng.standard_normal((config.n_train, config.n_junk))
    J_va = rng.standard_normal((config.n_valid, config.n_junk))

    groups = None
    if config.scenario != S1:
        n_tr_groups = config.n_groups - 1
        offsets = rng.normal(0.0, config.group_mean_sd,
                             size=(config.n_groups, p_true + config.n_junk))
        groups = np.arange(config.n_train) % n_tr_groups
        X_tr = X_tr + offsets[groups, :p_true]
        J_tr = J_tr + offsets[groups, p_true:]
        X_va = X_va + offsets[-1, :p_true]
        J_va = J_va + offsets[-1, p_true:]

    eps_tr = rng.normal(0.0, config.sigma_eps, size=config.n_train)
    eps_va = rng.normal(0.0, config.sigma_eps, size=config.n_valid)
    y_tr = X_tr @ beta + eps_tr
    y_va = X_va @ beta + eps_va

    train = _make_frame(X_tr, J_tr, y_tr, np.arange(config.n_train))
    valid = _make_frame(X_va, J_va, y_va,
                        np.arange(config.n_valid) + config.n_train)
    exposed = groups if config.scenario == S2 else None
    return GeneratedData(train, valid, exposed)
