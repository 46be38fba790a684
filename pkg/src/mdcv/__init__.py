"""mdcv: missing-data-aware cross-validation pipelines.

Core pieces: a mixed-type frame with per-cell missingness, Gower kNN and
mean/mode imputation with strict fit/transform separation, LASSO with an
internally cross-validated penalty, the two imputation-vs-CV orderings, and
a simulation harness comparing them.
"""

__version__ = "0.1.0"

from ._kernels import BACKEND as kernel_backend  # noqa: F401
