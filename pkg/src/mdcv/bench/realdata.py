"""Real-data harness: CSV ingestion against a user-supplied schema,
train/test resampling, rare-level lumping, prototype amputation, both CV
workflows with linear and forest models, and a mean/mode baseline.

The schema file (configparser grammar) declares each used column's kind and
the outcome, and optionally named amputation prototypes as column groups:

    [columns]
    sale_price = numeric
    neighborhood = nominal
    [outcome]
    name = sale_price
    log_transform = true
    [pattern:structure]
    columns = neighborhood, year_built
"""

from __future__ import annotations

import configparser
import csv
import math
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from ..ampute import AmputeConfig, MdPattern, ampute
from ..cvengine import (ForestModel, OlsModel, estimate_before,
                        estimate_during, finalize_curve)
from ..errors import InvalidConfigError, SchemaError
from ..frame import NOMINAL, NUMERIC, Column, Frame, make_folds
from ..impute import fit_simple
from ..models import ForestConfig, r_squared
from ..util import mix_seed
from .config import Setting, parse_int_list, parse_str_list
from .records import (STATUS_COMPLETE, STATUS_FAILED, ReplicateRecord,
                      write_records)
from .summary import summarize

OTHER_LEVEL = "__other__"
MISSING_TOKENS = {"", "NA", "NaN", "nan", "?"}


@dataclass(frozen=True)
class DataSchema:
    kinds: dict[str, str]              # column -> numeric | nominal
    outcome: str
    log_outcome: bool
    patterns: dict[str, tuple[str, ...]]   # prototype name -> column group


def load_schema(path: str | Path) -> DataSchema:
    cp = configparser.ConfigParser()
    cp.read_string(Path(path).read_text())
    if "columns" not in cp or "outcome" not in cp:
        raise InvalidConfigError("schema needs [columns] and [outcome] sections")
    kinds = {}
    for name, kind in cp["columns"].items():
        kind = kind.strip().lower()
        if kind not in (NUMERIC, NOMINAL):
            raise InvalidConfigError(f"column {name!r}: unknown kind {kind!r}")
        kinds[name] = kind
    outcome = cp["outcome"]["name"].strip()
    if outcome not in kinds or kinds[outcome] != NUMERIC:
        raise InvalidConfigError("outcome must be a declared numeric column")
    log_outcome = cp["outcome"].getboolean("log_transform", fallback=False)
    patterns = {}
    for section in cp.sections():
        if section.startswith("pattern:"):
            cols = parse_str_list(cp[section]["columns"])
            for c in cols:
                if c not in kinds:
                    raise InvalidConfigError(
                        f"pattern {section!r} names undeclared column {c!r}")
                if c == outcome:
                    raise InvalidConfigError("patterns may not ampute the outcome")
            patterns[section.split(":", 1)[1]] = cols
    return DataSchema(kinds, outcome, log_outcome, patterns)


def load_csv(csv_path: str | Path, schema: DataSchema,
             delimiter: str = ",") -> tuple[Frame, int]:
    """Parse the declared columns into a Frame. Rows with an unparseable or
    missing outcome cell (or a non-positive one under log transform) are
    rejected; the rejected count is returned for the manifest."""
    with open(csv_path, newline="") as fh:
        reader = csv.reader(fh, delimiter=delimiter)
        header = next(reader)
        missing_cols = [c for c in schema.kinds if c not in header]
        if missing_cols:
            raise SchemaError(f"CSV lacks declared columns: {missing_cols}")
        pos = {c: header.index(c) for c in schema.kinds}
        raw: dict[str, list] = {c: [] for c in schema.kinds}
        rejected = 0
        for row in reader:
            if len(row) != len(header):
                rejected += 1
                continue
            cells = {}
            ok = True
            for c, kind in schema.kinds.items():
                tok = row[pos[c]].strip()
                if tok in MISSING_TOKENS:
                    if c == schema.outcome:
                        ok = False
                        break
                    cells[c] = None
                    continue
                if kind == NUMERIC:
                    try:
                        val = float(tok)
                    except ValueError:
                        if c == schema.outcome:
                            ok = False
                            break
                        cells[c] = None
                        continue
                    if c == schema.outcome and schema.log_outcome and val <= 0:
                        ok = False
                        break
                    cells[c] = val
                else:
                    cells[c] = tok
            if not ok:
                rejected += 1
                continue
            for c in schema.kinds:
                raw[c].append(cells[c])

    n = len(raw[schema.outcome])
    cols = []
    for c, kind in schema.kinds.items():
        vals = raw[c]
        missing = np.array([v is None for v in vals])
        if kind == NUMERIC:
            numeric = np.array([0.0 if v is None else v for v in vals])
            if c == schema.outcome and schema.log_outcome:
                numeric = np.log(numeric)
            cols.append(Column.numeric(c, numeric, missing))
        else:
            levels = sorted({v for v in vals if v is not None})
            code = {lev: i for i, lev in enumerate(levels)}
            codes = np.array([0 if v is None else code[v] for v in vals])
            cols.append(Column.nominal(c, codes, levels, missing))
    return Frame(tuple(cols), schema.outcome, np.arange(n)), rejected


def lump_rare_levels(train: Frame, test: Frame,
                     threshold: float = 0.10) -> tuple[Frame, Frame]:
    """Collapse nominal levels rarer than ``threshold`` of the observed
    training cells into one catch-all level. Thresholds come from the
    training part only."""
    def remap(col: Column, keep: set[int], new_levels, code_map) -> Column:
        values = np.array([code_map[v] for v in col.values], dtype=np.int64)
        return Column(col.name, NOMINAL, values, col.missing, new_levels)

    new_train, new_test = [], []
    for ct, cs in zip(train.columns, test.columns):
        if ct.kind != NOMINAL:
            new_train.append(ct)
            new_test.append(cs)
            continue
        obs = ct.values[~ct.missing]
        counts = np.bincount(obs, minlength=len(ct.levels))
        total = counts.sum()
        keep = {i for i in range(len(ct.levels))
                if total and counts[i] / total >= threshold}
        if len(keep) == len(ct.levels):
            new_train.append(ct)
            new_test.append(cs)
            continue
        kept_levels = [lev for i, lev in enumerate(ct.levels) if i in keep]
        new_levels = tuple(kept_levels) + (OTHER_LEVEL,)
        other_code = len(kept_levels)
        code_map = {}
        for i in range(len(ct.levels)):
            code_map[i] = kept_levels.index(ct.levels[i]) if i in keep else other_code
        new_train.append(remap(ct, keep, new_levels, code_map))
        new_test.append(remap(cs, keep, new_levels, code_map))
    return (Frame(tuple(new_train), train.outcome_name, train.row_ids),
            Frame(tuple(new_test), test.outcome_name, test.row_ids))


@dataclass(frozen=True)
class RealDataConfig:
    n_replicates: int = 1
    ks: tuple[int, ...] = tuple(range(1, 11))
    v: int = 10
    base_seed: int = 0
    test_fraction: float = 0.25
    lump_threshold: float = 0.10
    mechanism: str = "MCAR"
    prop_incomplete: float = 0.30      # 0 disables amputation
    forest_trees: int = 500
    forest_min_leaf: int = 5
    out_dir: str = "out_realdata"
    raw_text: str = ""


def load_realdata_config(path: str | Path) -> RealDataConfig:
    text = Path(path).read_text()
    cp = configparser.ConfigParser()
    cp.read_string(text)
    sec = cp["realdata"] if "realdata" in cp else cp["experiment"]
    return RealDataConfig(
        n_replicates=sec.getint("n_replicates", 1),
        ks=parse_int_list(sec.get("ks", "1-10")),
        v=sec.getint("v", 10),
        base_seed=sec.getint("base_seed", 0),
        test_fraction=sec.getfloat("test_fraction", 0.25),
        lump_threshold=sec.getfloat("lump_threshold", 0.10),
        mechanism=sec.get("mechanism", "MCAR"),
        prop_incomplete=sec.getfloat("prop_incomplete", 0.30),
        forest_trees=sec.getint("forest_trees", 500),
        forest_min_leaf=sec.getint("forest_min_leaf", 5),
        out_dir=sec.get("out_dir", "out_realdata"),
        raw_text=text,
    )


def _prototype_config(frame: Frame, schema: DataSchema,
                      cfg: RealDataConfig) -> Optional[AmputeConfig]:
    if cfg.prop_incomplete <= 0 or not schema.patterns:
        return None
    pred_names = [c.name for c in frame.predictor_columns]
    masks = []
    for name, cols in schema.patterns.items():
        mask = np.zeros(len(pred_names), dtype=bool)
        for c in cols:
            mask[pred_names.index(c)] = True
        masks.append(MdPattern(mask))
    return AmputeConfig(tuple(masks), mechanism=cfg.mechanism,
                        prop_incomplete=cfg.prop_incomplete)


def _ampute_observed_rows(frame: Frame, acfg: AmputeConfig, seed: int) -> Frame:
    """Prototype amputation on top of natural missingness: rows that already
    contain a missing cell keep it; only fully observed rows are amputed."""
    complete = ~np.logical_or.reduce(
        [c.missing for c in frame.predictor_columns])
    if complete.all():
        return ampute(frame, acfg, seed)
    idx = np.flatnonzero(complete)
    amputed = ampute(frame.take(idx), acfg, seed)
    cols = []
    for orig, sub in zip(frame.columns, amputed.columns):
        if orig.name == frame.outcome_name:
            cols.append(orig)
            continue
        miss = orig.missing.copy()
        miss[idx] = sub.missing
        cols.append(Column(orig.name, orig.kind, orig.values, miss, orig.levels))
    return Frame(tuple(cols), frame.outcome_name, frame.row_ids)


def run_realdata(csv_path: str | Path, schema_path: str | Path,
                 cfg: RealDataConfig):
    """Resampled 75/25 evaluation of both workflows and both model families
    plus the mean/mode baseline. Returns (records, summary rows, metadata)."""
    schema = load_schema(schema_path)
    full, rejected = load_csv(csv_path, schema)
    n = full.n_rows
    n_test = int(round(cfg.test_fraction * n))
    models = {
        "ols": lambda: OlsModel(),
        "forest": lambda: ForestModel(ForestConfig(
            n_trees=cfg.forest_trees, min_leaf=cfg.forest_min_leaf)),
    }
    records: list[ReplicateRecord] = []
    for rep in range(cfg.n_replicates):
        seed = mix_seed(cfg.base_seed, rep)
        rng = np.random.default_rng(mix_seed(seed, 1))
        perm = rng.permutation(n)
        test_rows, train_rows = np.sort(perm[:n_test]), np.sort(perm[n_test:])
        train, test = full.take(train_rows), full.take(test_rows)
        train, test = lump_rare_levels(train, test, cfg.lump_threshold)
        acfg = _prototype_config(train, schema, cfg)
        if acfg is not None:
            train = _ampute_observed_rows(train, acfg, mix_seed(seed, 2))
            test = _ampute_observed_rows(test, acfg, mix_seed(seed, 3))
        plan = make_folds(train.n_rows, cfg.v, mix_seed(seed, 4))
        for model_name, make_model in models.items():
            setting = Setting(model_name, cfg.mechanism if acfg else "none",
                              train.n_rows, 0)
            try:
                records.append(_run_model_replicate(
                    setting, rep, seed, train, test, plan, cfg, make_model))
            except Exception as exc:
                records.append(ReplicateRecord(
                    setting=setting, replicate=rep, seed=seed,
                    status=STATUS_FAILED,
                    error=f"{type(exc).__name__}: {exc}"))
    rows = summarize(records, min_complete=1)
    meta = {"rows": n, "rejected_rows": rejected, "n_test": n_test}
    return records, rows, meta


def _run_model_replicate(setting, rep, seed, train, test, plan, cfg,
                         make_model) -> ReplicateRecord:
    model = make_model()
    wf_seed = mix_seed(seed, 5)
    during = estimate_during(train, cfg.ks, plan, wf_seed, model)
    before = estimate_before(train, cfg.ks, plan, wf_seed, model)
    ks_arr, curve, _ = finalize_curve(train, test, cfg.ks, mix_seed(seed, 6),
                                      model)
    k_idx = {int(k): i for i, k in enumerate(ks_arr)}

    # mean/mode baseline: impute train and test from training statistics
    simple = fit_simple(train)
    strain = simple.transform(train)
    stest = simple.transform(test)
    fitted = model.fit(strain, strain.outcome(), mix_seed(seed, 7))
    simple_r2 = r_squared(test.outcome(), fitted.predict(stest))

    return ReplicateRecord(
        setting=setting, replicate=rep, seed=seed, status=STATUS_COMPLETE,
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
        down_r2_simple=float(simple_r2),
    )
