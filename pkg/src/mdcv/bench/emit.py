"""Write summary tables, R^2-vs-k curve data, and timing comparisons.

Table cells are scaled by 100 with 4 significant decimals, mirroring the
reporting convention; curve and timing files keep full precision.
Re-emission over identical records is byte-identical.
"""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Sequence

import numpy as np

from .records import STATUS_COMPLETE, ReplicateRecord
from .summary import SummaryRow

_TABLE_COLS = [
    ("bias_during", "bias_during"), ("bias_before", "bias_before"),
    ("sd_during", "sd_during"), ("sd_before", "sd_before"),
    ("rmse_during", "rmse_during"), ("rmse_before", "rmse_before"),
    ("mean_abs_diff", "mean_abs_diff"),
    ("down_r2_during", "down_r2_during"),
    ("down_r2_before", "down_r2_before"),
    ("mean_true_r2", "mean_true_r2"),
]


def _scaled(x: float) -> str:
    return f"{100.0 * x:.4g}"


def emit_outputs(rows: Sequence[SummaryRow],
                 records: Sequence[ReplicateRecord],
                 directory: str | Path) -> list[Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    tables = directory / "tables.tsv"
    with open(tables, "w", newline="") as fh:
        w = csv.writer(fh, delimiter="\t", lineterminator="\n")
        w.writerow(["scenario", "mechanism", "n_train", "n_junk", "n_complete"]
                   + [name for name, _ in _TABLE_COLS] + ["timing_ratio"])
        for row in rows:
            w.writerow([
                row.scenario, row.mechanism,
                "overall" if row.n_train is None else row.n_train,
                "overall" if row.n_junk is None else row.n_junk,
                row.n_complete,
            ] + [_scaled(getattr(row, attr)) for _, attr in _TABLE_COLS]
              + [f"{row.timing_ratio:.4g}"])
    written.append(tables)

    complete = [r for r in records if r.status == STATUS_COMPLETE]
    curves = directory / "curves.tsv"
    with open(curves, "w", newline="") as fh:
        w = csv.writer(fh, delimiter="\t", lineterminator="\n")
        w.writerow(["setting", "series", "k", "mean_r2"])
        for setting in sorted({r.setting for r in complete},
                              key=lambda s: s.label):
            recs = [r for r in complete if r.setting == setting]
            ks = recs[0].ks
            for series, attr in (("truth", "truth"),
                                 ("during", "est_during"),
                                 ("before", "est_before")):
                means = np.mean([getattr(r, attr) for r in recs], axis=0)
                for k, v in zip(ks, means):
                    w.writerow([setting.label, series, k, f"{v:.17g}"])
    written.append(curves)

    timing = directory / "timing.tsv"
    with open(timing, "w", newline="") as fh:
        w = csv.writer(fh, delimiter="\t", lineterminator="\n")
        w.writerow(["setting", "replicate", "imp_sec_during",
                    "imp_sec_before", "model_sec_during", "model_sec_before"])
        for r in complete:
            w.writerow([r.setting.label, r.replicate,
                        f"{r.imp_sec_during:.17g}", f"{r.imp_sec_before:.17g}",
                        f"{r.model_sec_during:.17g}",
                        f"{r.model_sec_before:.17g}"])
    written.append(timing)
    return written
