"""Aggregate replicate records into the bias / SD / RMSE comparison tables.

Conventions: the per-replicate estimation error of a workflow is
estimate_at_chosen_k - truth_at_that_same_k, so positive bias = optimism.
The sd columns are the spread of the raw estimates themselves (how much the
reported number moves from replicate to replicate), while rmse is taken
against the truth. Overall rows aggregate over training size and junk count
within one (scenario, mechanism).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .config import Setting
from .records import STATUS_COMPLETE, ReplicateRecord


@dataclass(frozen=True)
class SummaryRow:
    scenario: str
    mechanism: str
    n_train: Optional[int]       # None marks an Overall row
    n_junk: Optional[int]
    n_complete: int
    bias_during: float
    bias_before: float
    sd_during: float             # SD of the raw estimates, not of the errors
    sd_before: float
    rmse_during: float
    rmse_before: float
    mean_abs_diff: float         # mean over k of |est_during - est_before|
    down_r2_during: float        # mean truth at each workflow's chosen k
    down_r2_before: float
    mean_true_r2: float          # mean truth at the during-CV chosen k
    timing_ratio: float          # mean imputation-seconds ratio during/before

    @property
    def label(self) -> str:
        if self.n_train is None:
            return f"{self.scenario}_{self.mechanism}_overall"
        return f"{self.scenario}_{self.mechanism}_n{self.n_train}_j{self.n_junk}"


def _estimates(recs: Sequence[ReplicateRecord], which: str):
    """Raw estimate and truth at the workflow's chosen k, per replicate."""
    est, tru = [], []
    for r in recs:
        idx = {k: i for i, k in enumerate(r.ks)}
        if which == "during":
            i = idx[r.chosen_k_during]
            est.append(r.est_during[i])
        else:
            i = idx[r.chosen_k_before]
            est.append(r.est_before[i])
        tru.append(r.truth[i])
    return np.asarray(est), np.asarray(tru)


def _errors(recs: Sequence[ReplicateRecord], which: str):
    est, tru = _estimates(recs, which)
    return est - tru


def _row(recs: list[ReplicateRecord], scenario: str, mechanism: str,
         n_train: Optional[int], n_junk: Optional[int]) -> SummaryRow:
    est_d, tru_d = _estimates(recs, "during")
    est_b, tru_b = _estimates(recs, "before")
    e_d = est_d - tru_d
    e_b = est_b - tru_b
    absdiff = np.array([np.mean(np.abs(np.asarray(r.est_during) -
                                       np.asarray(r.est_before)))
                        for r in recs])
    down_d = np.array([r.down_r2_during for r in recs])
    down_b = np.array([r.down_r2_before for r in recs])
    ratio = np.array([r.imp_sec_during / r.imp_sec_before for r in recs
                      if r.imp_sec_before > 0])
    return SummaryRow(
        scenario, mechanism, n_train, n_junk, len(recs),
        bias_during=float(e_d.mean()), bias_before=float(e_b.mean()),
        sd_during=float(est_d.std(ddof=1)) if len(est_d) > 1 else math.nan,
        sd_before=float(est_b.std(ddof=1)) if len(est_b) > 1 else math.nan,
        rmse_during=float(np.sqrt((e_d ** 2).mean())),
        rmse_before=float(np.sqrt((e_b ** 2).mean())),
        mean_abs_diff=float(absdiff.mean()),
        down_r2_during=float(down_d.mean()),
        down_r2_before=float(down_b.mean()),
        mean_true_r2=float(down_d.mean()),
        timing_ratio=float(ratio.mean()) if len(ratio) else math.nan,
    )


def summarize(records: Sequence[ReplicateRecord],
              min_complete: int = 2) -> list[SummaryRow]:
    """One row per populated setting plus an Overall row per
    (scenario, mechanism). Cells with fewer than ``min_complete`` completed
    replicates are omitted with a warning."""
    complete = [r for r in records if r.status == STATUS_COMPLETE]
    rows: list[SummaryRow] = []
    settings = sorted({r.setting for r in complete},
                      key=lambda s: (s.scenario, s.mechanism, s.n_train, s.n_junk))
    for s in settings:
        recs = [r for r in complete if r.setting == s]
        if len(recs) < min_complete:
            warnings.warn(f"setting {s.label}: only {len(recs)} complete "
                          "replicates; row omitted")
            continue
        rows.append(_row(recs, s.scenario, s.mechanism, s.n_train, s.n_junk))
    pairs = sorted({(s.scenario, s.mechanism) for s in settings})
    for scenario, mechanism in pairs:
        recs = [r for r in complete
                if r.setting.scenario == scenario
                and r.setting.mechanism == mechanism]
        if len(recs) >= min_complete:
            rows.append(_row(recs, scenario, mechanism, None, None))
    return rows


def rmse_identity_residual(row: SummaryRow, records: Sequence[ReplicateRecord],
                           which: str = "during") -> float:
    """Self-check: RMSE^2 - bias^2 minus the n-denominator variance of the
    errors, which must vanish to rounding."""
    recs = [r for r in records if r.status == STATUS_COMPLETE
            and r.setting.scenario == row.scenario
            and r.setting.mechanism == row.mechanism
            and (row.n_train is None or r.setting.n_train == row.n_train)
            and (row.n_junk is None or r.setting.n_junk == row.n_junk)]
    e = _errors(recs, which)
    rmse = row.rmse_during if which == "during" else row.rmse_before
    bias = row.bias_during if which == "during" else row.bias_before
    return float(rmse ** 2 - bias ** 2 - e.std(ddof=0) ** 2)
