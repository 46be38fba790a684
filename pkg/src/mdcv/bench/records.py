"""Replicate records and their on-disk format.

One tab-separated file per setting with a fixed header; floats carry 17
significant digits so a read-back is bit-faithful. Records are keyed by
replicate id, never appended positionally, so the persisted set does not
depend on worker count or arrival order.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .config import Setting

STATUS_COMPLETE = "complete"
STATUS_FAILED = "failed"


@dataclass
class ReplicateRecord:
    setting: Setting
    replicate: int
    seed: int
    status: str
    error: str = ""
    ks: tuple[int, ...] = ()
    truth: tuple[float, ...] = ()          # true external R^2 per k
    est_during: tuple[float, ...] = ()     # estimated external R^2 per k
    est_before: tuple[float, ...] = ()
    chosen_k_during: int = -1
    chosen_k_before: int = -1
    down_r2_during: float = math.nan       # truth at the workflow's chosen k
    down_r2_before: float = math.nan
    imp_sec_during: float = math.nan
    imp_sec_before: float = math.nan
    model_sec_during: float = math.nan
    model_sec_before: float = math.nan
    down_r2_simple: float = math.nan       # mean/mode baseline (real-data runs)


_SCALAR_COLS = [
    "replicate", "seed", "status", "error",
    "chosen_k_during", "chosen_k_before",
    "down_r2_during", "down_r2_before",
    "imp_sec_during", "imp_sec_before",
    "model_sec_during", "model_sec_before",
    "down_r2_simple",
]


def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.17g}"
    return str(x)


def records_filename(setting: Setting) -> str:
    return f"records_{setting.label}.tsv"


def write_records(records: Sequence[ReplicateRecord], directory: str | Path) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    by_setting: dict[Setting, list[ReplicateRecord]] = {}
    for r in records:
        by_setting.setdefault(r.setting, []).append(r)
    for setting, recs in by_setting.items():
        recs = sorted(recs, key=lambda r: r.replicate)
        ks = next((r.ks for r in recs if r.ks), ())
        header = _SCALAR_COLS + \
            [f"truth_k{k}" for k in ks] + \
            [f"during_k{k}" for k in ks] + \
            [f"before_k{k}" for k in ks]
        path = directory / records_filename(setting)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, delimiter="\t", lineterminator="\n")
            w.writerow(["scenario", setting.scenario, "mechanism",
                        setting.mechanism, "n_train", setting.n_train,
                        "n_junk", setting.n_junk, "ks",
                        ",".join(map(str, ks))])
            w.writerow(header)
            for r in recs:
                row = [_fmt(getattr(r, c)) for c in _SCALAR_COLS]
                for series in (r.truth, r.est_during, r.est_before):
                    if series:
                        row.extend(_fmt(x) for x in series)
                    else:
                        row.extend("nan" for _ in ks)
                w.writerow(row)


def read_records(directory: str | Path) -> list[ReplicateRecord]:
    records: list[ReplicateRecord] = []
    for path in sorted(Path(directory).glob("records_*.tsv")):
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh, delimiter="\t"))
        meta = rows[0]
        setting = Setting(meta[1], meta[3], int(meta[5]), int(meta[7]))
        ks = tuple(int(k) for k in meta[9].split(",")) if meta[9] else ()
        header = rows[1]
        nk = len(ks)
        base = len(_SCALAR_COLS)
        assert header[:base] == _SCALAR_COLS
        for row in rows[2:]:
            d = dict(zip(_SCALAR_COLS, row))
            status = d["status"]
            rec = ReplicateRecord(
                setting=setting,
                replicate=int(d["replicate"]),
                seed=int(d["seed"]),
                status=status,
                error=d["error"],
                ks=ks if status == STATUS_COMPLETE else (),
                chosen_k_during=int(d["chosen_k_during"]),
                chosen_k_before=int(d["chosen_k_before"]),
                down_r2_during=float(d["down_r2_during"]),
                down_r2_before=float(d["down_r2_before"]),
                imp_sec_during=float(d["imp_sec_during"]),
                imp_sec_before=float(d["imp_sec_before"]),
                model_sec_during=float(d["model_sec_during"]),
                model_sec_before=float(d["model_sec_before"]),
                down_r2_simple=float(d["down_r2_simple"]),
            )
            if status == STATUS_COMPLETE:
                vals = [float(x) for x in row[base:]]
                rec.truth = tuple(vals[:nk])
                rec.est_during = tuple(vals[nk:2 * nk])
                rec.est_before = tuple(vals[2 * nk:3 * nk])
            records.append(rec)
    return records
