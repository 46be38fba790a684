"""Pure-python cyclic coordinate descent for the LASSO path (fallback
backend).

Expects standardized predictors (zero mean, unit population variance per
column) and centered y; lambdas descending. Works on the Gram matrix
(X'X, X'y), so one coordinate update costs O(p) independent of n, and
iterates the active set between full verification sweeps. Semantics match
``_cd_cy.pyx`` to floating-point rounding.
"""

from __future__ import annotations

import numpy as np


def _soft(z: float, g: float) -> float:
    if z > g:
        return z - g
    if z < -g:
        return z + g
    return 0.0


def cd_path(X, y, lambdas, tol=1e-7, max_sweeps=100_000, check_objective=False):
    """Solve the LASSO along ``lambdas`` with warm starts.

    Returns (betas, sweeps, converged): betas is (n_lambda, p) on the
    standardized scale, sweeps the iteration count per lambda, converged a
    bool flag per lambda.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    n, p = X.shape
    G = X.T @ X
    Xty = X.T @ y
    nl = len(lambdas)
    betas = np.zeros((nl, p))
    sweeps_out = np.zeros(nl, dtype=np.int64)
    converged = np.zeros(nl, dtype=bool)
    beta = np.zeros(p)
    grad = np.zeros(p)              # G @ beta, maintained incrementally
    for li, lam in enumerate(lambdas):
        prev_obj = np.inf
        sweeps = 0
        done = False
        while sweeps < max_sweeps and not done:
            # full sweep over all coordinates
            sweeps += 1
            max_delta = _sweep(range(p), G, Xty, beta, grad, n, lam)
            if check_objective:
                prev_obj = _check_obj(X, y, beta, lam, n, prev_obj)
            if max_delta < tol:
                done = True
                break
            # iterate the active set until it stabilizes, then re-verify
            active = np.flatnonzero(beta)
            while sweeps < max_sweeps:
                sweeps += 1
                max_delta = _sweep(active, G, Xty, beta, grad, n, lam)
                if check_objective:
                    prev_obj = _check_obj(X, y, beta, lam, n, prev_obj)
                if max_delta < tol:
                    break
        converged[li] = done
        sweeps_out[li] = sweeps
        betas[li] = beta
    return betas, sweeps_out, converged


def _sweep(coords, G, Xty, beta, grad, n, lam) -> float:
    max_delta = 0.0
    for j in coords:
        bj = beta[j]
        # columns are standardized, so G[j, j] == n
        z = (Xty[j] - grad[j]) / n + bj
        new = _soft(z, lam)
        if new != bj:
            grad += G[:, j] * (new - bj)
            beta[j] = new
            d = abs(new - bj)
            if d > max_delta:
                max_delta = d
    return max_delta


def _check_obj(X, y, beta, lam, n, prev_obj) -> float:
    r = y - X @ beta
    obj = 0.5 * float(r @ r) / n + lam * float(np.abs(beta).sum())
    assert obj <= prev_obj + 1e-10, "objective increased within a sweep"
    return obj
