"""Hot kernels: Gower kNN imputation grid and LASSO coordinate descent.

Two interchangeable backends exist: a compiled Cython extension and a
pure-numpy fallback. The compiled one is used when importable unless the
environment variable ``MDCV_PURE_PYTHON`` is set to a non-empty value other
than ``0``. The kNN kernel is bit-identical across backends; the coordinate
descent kernels agree to floating-point rounding (the fallback uses BLAS
dot products).
"""

from __future__ import annotations

import os

from . import _cd_py, _gower_py

_force_pure = os.environ.get("MDCV_PURE_PYTHON", "0") not in ("", "0")

if not _force_pure:
    try:
        from . import _cd_cy, _gower_cy
        BACKEND = "compiled"
    except ImportError:
        BACKEND = "pure"
else:
    BACKEND = "pure"

if BACKEND == "compiled":
    _gower = _gower_cy
    _cd = _cd_cy
else:
    _gower = _gower_py
    _cd = _cd_py


def get_backend(name: str):
    """Return the (gower, cd) module pair for an explicit backend name."""
    if name == "pure":
        return _gower_py, _cd_py
    if name == "compiled":
        from . import _cd_cy, _gower_cy
        return _gower_cy, _cd_cy
    raise ValueError(f"unknown backend {name!r}")


knn_impute_grid = _gower.knn_impute_grid
gower_row_distances = _gower.gower_row_distances


def cd_path(X, y, lambdas, tol=1e-7, max_sweeps=100_000, check_objective=False,
            _cd_mod=None):
    """Backend-dispatching coordinate descent; see ``_cd_py.cd_path``."""
    import numpy as np

    mod = _cd_mod if _cd_mod is not None else _cd
    y = np.ascontiguousarray(y, dtype=np.float64)
    lambdas = np.ascontiguousarray(lambdas, dtype=np.float64)
    return mod.cd_path(X, y, lambdas, tol, max_sweeps, check_objective)
