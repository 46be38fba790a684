#!/usr/bin/env python3
"""Compare the compiled and pure-Python kernel backends.

Times the two hot kernels on payloads shaped like the simulation's own
workload and prints per-backend medians plus the speedup:

  * Gower kNN imputation grid: one donor pool, many recipients, the full
    k grid in one call.
  * LASSO coordinate descent along a 100-lambda path.

Usage: python benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import statistics
import time

import numpy as np

from mdcv import _kernels


def knn_payload(seed, nd=900, nr=450, p=20, n_nom=4):
    rng = np.random.default_rng(seed)
    d_vals = rng.normal(size=(nd, p))
    r_vals = rng.normal(size=(nr, p))
    nom = np.zeros(p, dtype=np.uint8)
    nlev = np.zeros(p, dtype=np.int64)
    for j in range(p - n_nom, p):
        nom[j] = 1
        nlev[j] = 4
        d_vals[:, j] = rng.integers(0, 4, size=nd)
        r_vals[:, j] = rng.integers(0, 4, size=nr)
    d_obs = (rng.random((nd, p)) > 0.15).astype(np.uint8)
    r_obs = (rng.random((nr, p)) > 0.15).astype(np.uint8)
    inv_range = np.where(nom == 1, 0.0, 1.0 / 6.0)
    miss = np.argwhere(r_obs == 0)
    ks = np.arange(1, 16, dtype=np.int64)
    return (d_vals, d_obs, r_vals, r_obs, nom, nlev, inv_range,
            np.ascontiguousarray(miss[:, 0]),
            np.ascontiguousarray(miss[:, 1]), ks)


def cd_payload(seed, n=500, p=20):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, p))
    X = (X - X.mean(0)) / X.std(0)
    y = X[:, :5] @ rng.normal(size=5) + rng.normal(size=n)
    y = y - y.mean()
    lam_max = np.abs(X.T @ y).max() / n
    lambdas = np.geomspace(lam_max, lam_max * 1e-3, 100)
    return X, y, lambdas


def timeit(fn, repeat):
    out = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        out.append(time.perf_counter() - t0)
    return statistics.median(out)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    backends = {"pure": _kernels.get_backend("pure")}
    try:
        backends["compiled"] = _kernels.get_backend("compiled")
    except ImportError:
        print("compiled backend not available; timing pure only")

    knn_args = knn_payload(0)
    X, y, lambdas = cd_payload(1)
    results = {}
    for name, (gower, cd) in backends.items():
        t_knn = timeit(lambda: gower.knn_impute_grid(*knn_args), args.repeat)
        t_cd = timeit(lambda: _kernels.cd_path(X, y, lambdas, _cd_mod=cd),
                      args.repeat)
        results[name] = (t_knn, t_cd)
        print(f"{name:>9}  knn_impute_grid {t_knn*1e3:8.1f} ms   "
              f"cd_path {t_cd*1e3:8.1f} ms")

    if len(results) == 2:
        pk, pc = results["pure"]
        ck, cc = results["compiled"]
        print(f"{'speedup':>9}  knn_impute_grid {pk/ck:7.1f}x    "
              f"cd_path {pc/cc:7.1f}x")


if __name__ == "__main__":
    main()
