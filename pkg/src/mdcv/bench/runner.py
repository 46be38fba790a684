"""Deterministic parallel execution of simulation replicates.

One replicate: generate -> ampute (train and validation share the pattern
set) -> run both CV workflows over the k grid with a shared fold plan ->
per-k finalize sweep against the validation set -> one keyed record.
Failures never abort the run; they persist as status=failed and are
excluded from summaries.
"""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .. import __version__
from .._kernels import BACKEND
from ..ampute import AmputeConfig, ampute, gen_patterns
from ..cvengine import estimate_before, estimate_during, finalize_curve
from ..errors import InvalidConfigError
from ..frame import make_folds
from ..simgen import GenConfig, generate
from ..util import mix_seed
from .config import ExperimentConfig, Setting
from .records import (STATUS_COMPLETE, STATUS_FAILED, ReplicateRecord,
                      write_records)

N_TRUE_PREDICTORS = 10


def run_replicate(setting: Setting, replicate: int, base_seed: int,
                  ks: Sequence[int], v: int, n_valid: int,
                  sigma_eps: float = 3.0,
                  group_mean_sd: float = 0.5) -> ReplicateRecord:
    # stable across processes: derived from the label text, not hash()
    setting_id = sum(ord(c) * (i + 1) for i, c in enumerate(setting.label))
    seed = mix_seed(base_seed, setting_id, replicate)
    try:
        gen = GenConfig(n_train=setting.n_train, n_valid=n_valid,
                        sigma_eps=sigma_eps, group_mean_sd=group_mean_sd,
                        n_junk=setting.n_junk, scenario=setting.scenario)
        data = generate(gen, mix_seed(seed, 1))
        p = N_TRUE_PREDICTORS + setting.n_junk
        patterns = gen_patterns(p, mix_seed(seed, 2))
        acfg = AmputeConfig(patterns, mechanism=setting.mechanism)
        train = ampute(data.train, acfg, mix_seed(seed, 3))
        valid = ampute(data.valid, acfg, mix_seed(seed, 4))

        if data.train_groups is not None:
            if len(np.unique(data.train_groups)) != v:
                raise InvalidConfigError(
                    "grouped scenario needs v == training group count")
            plan = make_folds(train.n_rows, v, mix_seed(seed, 5),
                              groups=data.train_groups)
        else:
            plan = make_folds(train.n_rows, v, mix_seed(seed, 5))

        wf_seed = mix_seed(seed, 6)
        during = estimate_during(train, ks, plan, wf_seed)
        before = estimate_before(train, ks, plan, wf_seed)
        ks_arr, curve, _ = finalize_curve(train, valid, ks, mix_seed(seed, 7))

        k_idx = {int(k): i for i, k in enumerate(ks_arr)}
        return ReplicateRecord(
            setting=setting, replicate=replicate, seed=seed,
            status=STATUS_COMPLETE,
            ks=tuple(int(k) for k in ks_arr),
            truth=tuple(float(x) for x in curve),
            est_during=tuple(float(x) for x in during.r2),
            est_before=tuple(float(x) for x in before.r2),
            chosen_k_during=during.chosen_k,
            chosen_k_before=before.chosen_k,
            down_r2_during=float(curve[k_idx[during.chosen_k]]),
            down_r2_before=float(curve[k_idx[before.chosen_k]]),
            imp_sec_during=during.impute_seconds,
            imp_sec_before=before.impute_seconds,
            model_sec_during=during.model_seconds,
            model_sec_before=before.model_seconds,
        )
    except Exception as exc:  # per-replicate failures never abort the run
        return ReplicateRecord(
            setting=setting, replicate=replicate, seed=seed,
            status=STATUS_FAILED,
            error=f"{type(exc).__name__}: {exc}".replace("\t", " ").replace("\n", " "),
        )


def _task(args):
    return run_replicate(*args)


def run_simulation(config: ExperimentConfig,
                   workers: Optional[int] = None) -> list[ReplicateRecord]:
    workers = workers if workers is not None else config.workers
    tasks = [(s, r, config.base_seed, config.ks, config.v, config.n_valid,
              config.sigma_eps, config.group_mean_sd)
             for s in config.settings for r in range(config.n_replicates)]
    keyed: dict[tuple[Setting, int], ReplicateRecord] = {}
    if workers == 1:
        for t in tasks:
            rec = _task(t)
            keyed[(rec.setting, rec.replicate)] = rec
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for rec in pool.map(_task, tasks, chunksize=1):
                keyed[(rec.setting, rec.replicate)] = rec
    return [keyed[(s, r)] for s in config.settings
            for r in range(config.n_replicates)]


def write_manifest(config: ExperimentConfig,
                   records: Sequence[ReplicateRecord],
                   directory: str | Path) -> dict:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    per_setting = {}
    for s in config.settings:
        recs = [r for r in records if r.setting == s]
        per_setting[s.label] = {
            "scheduled": config.n_replicates,
            "completed": sum(r.status == STATUS_COMPLETE for r in recs),
            "failed": sum(r.status == STATUS_FAILED for r in recs),
        }
    manifest = {
        "artifact_version": __version__,
        "kernel_backend": BACKEND,
        "base_seed": config.base_seed,
        "settings": per_setting,
        "config_text": config.raw_text,
    }
    with open(directory / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest


def run_and_persist(config: ExperimentConfig,
                    workers: Optional[int] = None) -> list[ReplicateRecord]:
    records = run_simulation(config, workers)
    write_records(records, config.out_dir)
    write_manifest(config, records, config.out_dir)
    return records
