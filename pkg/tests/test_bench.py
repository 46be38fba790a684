"""Harness plumbing: config parsing, record persistence, summary math,
emission stability, CLI behavior, and the real-data path."""

import csv
import json
import math
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from mdcv.bench.cli import main as cli_main
from mdcv.bench.config import (ExperimentConfig, Setting, load_config,
                               parse_int_list, parse_str_list)
from mdcv.bench.emit import emit_outputs
from mdcv.bench.records import (STATUS_COMPLETE, STATUS_FAILED,
                                ReplicateRecord, read_records, write_records)
from mdcv.bench.runner import run_replicate, run_simulation
from mdcv.bench.summary import rmse_identity_residual, summarize
from mdcv.errors import InvalidConfigError

TINY = dict(n_train=(60,), ks=(1, 2, 3), n_replicates=2, n_valid=200, v=5)


def test_parse_helpers():
    assert parse_int_list("1, 2, 5-8") == (1, 2, 5, 6, 7, 8)
    assert parse_int_list("3") == (3,)
    assert parse_str_list(" S1 , S2 ") == ("S1", "S2")


def test_config_round_trip(tmp_path):
    text = ("[experiment]\n"
            "scenarios = S1, S2\nmechanisms = MCAR, MAR\n"
            "n_train = 100, 500\nks = 1-15\nn_replicates = 200\n"
            "base_seed = 17\nsigma_eps = 3.0\nout_dir = somewhere\n")
    path = tmp_path / "cfg.ini"
    path.write_text(text)
    cfg = load_config(path)
    assert cfg.scenarios == ("S1", "S2")
    assert cfg.ks == tuple(range(1, 16))
    assert cfg.base_seed == 17
    assert cfg.sigma_eps == 3.0
    assert cfg.raw_text == text
    assert len(cfg.settings) == 8
    assert cfg.settings[0].label == "S1_MCAR_n100_j10"


def test_config_validation(tmp_path):
    with pytest.raises(InvalidConfigError):
        ExperimentConfig(scenarios=("S7",))
    with pytest.raises(InvalidConfigError):
        ExperimentConfig(mechanisms=("MNAR",))
    with pytest.raises(InvalidConfigError):
        ExperimentConfig(n_replicates=0)
    p = tmp_path / "bad.ini"
    p.write_text("[other]\nx = 1\n")
    with pytest.raises(InvalidConfigError):
        load_config(p)


def fake_record(setting, rep, status=STATUS_COMPLETE):
    rng = np.random.default_rng(rep + 1000)
    ks = (1, 2, 3)
    if status != STATUS_COMPLETE:
        return ReplicateRecord(setting=setting, replicate=rep, seed=rep,
                               status=status, error="FitError: boom")
    truth = tuple(rng.uniform(0.3, 0.5, 3))
    return ReplicateRecord(
        setting=setting, replicate=rep, seed=rep, status=status, ks=ks,
        truth=truth,
        est_during=tuple(t + rng.normal(0, 0.02) for t in truth),
        est_before=tuple(t + 0.01 + rng.normal(0, 0.01) for t in truth),
        chosen_k_during=2, chosen_k_before=3,
        down_r2_during=truth[1], down_r2_before=truth[2],
        imp_sec_during=1.1 * (rep + 1), imp_sec_before=0.1 * (rep + 1),
        model_sec_during=2.0, model_sec_before=2.0)


class TestRecords:
    def test_round_trip_bit_faithful(self, tmp_path):
        s1 = Setting("S1", "MCAR", 100, 10)
        s2 = Setting("S2", "MAR", 500, 10)
        recs = [fake_record(s1, 0), fake_record(s1, 1),
                fake_record(s1, 2, STATUS_FAILED), fake_record(s2, 0)]
        write_records(recs, tmp_path)
        back = read_records(tmp_path)
        assert len(back) == 4
        by_key = {(r.setting, r.replicate): r for r in back}
        for r in recs:
            b = by_key[(r.setting, r.replicate)]
            assert b.status == r.status
            assert b.truth == r.truth            # exact float round-trip
            assert b.est_during == r.est_during
            assert b.chosen_k_during == r.chosen_k_during
            if r.status == STATUS_FAILED:
                assert b.error == "FitError: boom"

    def test_keyed_not_positional(self, tmp_path):
        s = Setting("S1", "MCAR", 100, 10)
        recs = [fake_record(s, r) for r in (3, 0, 2, 1)]
        write_records(recs, tmp_path)
        back = read_records(tmp_path)
        assert [r.replicate for r in back] == [0, 1, 2, 3]


class TestSummary:
    def make_rows(self):
        s = Setting("S1", "MCAR", 100, 10)
        recs = [fake_record(s, r) for r in range(30)]
        return recs, summarize(recs)

    def test_error_convention(self):
        """bias = mean(estimate@chosen_k - truth@same_k), per workflow."""
        recs, rows = self.make_rows()
        row = rows[0]
        want_d = np.mean([r.est_during[1] - r.truth[1] for r in recs])
        want_b = np.mean([r.est_before[2] - r.truth[2] for r in recs])
        assert row.bias_during == pytest.approx(want_d, rel=1e-12)
        assert row.bias_before == pytest.approx(want_b, rel=1e-12)

    def test_rmse_identity(self):
        recs, rows = self.make_rows()
        for which in ("during", "before"):
            assert abs(rmse_identity_residual(rows[0], recs, which)) < 1e-12

    def test_timing_ratio(self):
        recs, rows = self.make_rows()
        want = np.mean([r.imp_sec_during / r.imp_sec_before for r in recs])
        assert rows[0].timing_ratio == pytest.approx(want)

    def test_overall_rows(self):
        s1 = Setting("S1", "MCAR", 100, 10)
        s2 = Setting("S1", "MCAR", 500, 10)
        recs = [fake_record(s, r) for s in (s1, s2) for r in range(5)]
        rows = summarize(recs)
        labels = [r.label for r in rows]
        assert "S1_MCAR_n100_j10" in labels
        assert "S1_MCAR_n500_j10" in labels
        assert "S1_MCAR_overall" in labels
        overall = rows[-1]
        assert overall.n_complete == 10

    def test_failed_records_excluded_and_thin_cells_warn(self):
        s = Setting("S1", "MCAR", 100, 10)
        recs = [fake_record(s, 0), fake_record(s, 1, STATUS_FAILED)]
        with pytest.warns(UserWarning):
            rows = summarize(recs, min_complete=2)
        assert rows == []


def test_emit_byte_identical(tmp_path):
    s = Setting("S1", "MCAR", 100, 10)
    recs = [fake_record(s, r) for r in range(6)]
    rows = summarize(recs)
    a, b = tmp_path / "a", tmp_path / "b"
    emit_outputs(rows, recs, a)
    emit_outputs(rows, recs, b)
    for name in ("tables.tsv", "curves.tsv", "timing.tsv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


class TestRunner:
    def test_single_replicate_record(self):
        rec = run_replicate(Setting("S1", "MCAR", 60, 2), 0, 3,
                            [1, 2, 3], 5, 200)
        assert rec.status == STATUS_COMPLETE
        assert rec.ks == (1, 2, 3)
        assert len(rec.truth) == 3
        assert rec.chosen_k_during in (1, 2, 3)
        assert rec.imp_sec_during > rec.imp_sec_before

    def test_failure_is_recorded_not_raised(self):
        # v larger than the group count makes the grouped plan impossible
        rec = run_replicate(Setting("S2", "MCAR", 60, 2), 0, 3,
                            [1, 2], 7, 100)
        assert rec.status == STATUS_FAILED
        assert "group" in rec.error

    def test_worker_count_invariance(self):
        cfg = ExperimentConfig(scenarios=("S1",), mechanisms=("MCAR",),
                               base_seed=11, **TINY)
        serial = run_simulation(cfg, workers=1)
        parallel = run_simulation(cfg, workers=3)
        assert len(serial) == len(parallel) == 2
        for a, b in zip(serial, parallel):
            assert a.replicate == b.replicate
            assert a.seed == b.seed
            assert a.truth == b.truth
            assert a.est_during == b.est_during
            assert a.est_before == b.est_before


class TestCli:
    def write_cfg(self, tmp_path, out):
        cfg = tmp_path / "cfg.ini"
        cfg.write_text("[experiment]\nscenarios = S1\nmechanisms = MCAR\n"
                       "n_train = 60\nks = 1-3\nv = 5\nn_replicates = 2\n"
                       "n_valid = 200\nbase_seed = 2\n"
                       f"out_dir = {out}\n")
        return cfg

    def test_simulate_then_reemit(self, tmp_path):
        out = tmp_path / "run"
        cfg = self.write_cfg(tmp_path, out)
        assert cli_main(["simulate", "--config", str(cfg)]) == 0
        for name in ("manifest.json", "tables.tsv", "curves.tsv",
                     "timing.tsv", "records_S1_MCAR_n60_j10.tsv"):
            assert (out / name).exists(), name
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["settings"]["S1_MCAR_n60_j10"]["completed"] == 2
        assert manifest["base_seed"] == 2

        out2 = tmp_path / "again"
        assert cli_main(["emit", "--records", str(out),
                         "--out", str(out2)]) == 0
        assert (out2 / "tables.tsv").read_bytes() == \
            (out / "tables.tsv").read_bytes()
        assert cli_main(["summarize", "--records", str(out)]) == 0

    def test_seed_and_out_overrides(self, tmp_path):
        cfg = self.write_cfg(tmp_path, tmp_path / "ignored")
        out = tmp_path / "ov"
        assert cli_main(["simulate", "--config", str(cfg),
                         "--seed", "77", "--out", str(out),
                         "--workers", "1"]) == 0
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["base_seed"] == 77

    def test_console_script_installed(self):
        res = subprocess.run(["mdcv", "--help"], capture_output=True,
                             text=True)
        assert res.returncode == 0
        for sub in ("simulate", "summarize", "realdata", "emit"):
            assert sub in res.stdout


# ---------------------------------------------------------------------------
# Real-data harness
# ---------------------------------------------------------------------------

def synthetic_csv(path: Path, n=160, seed=0, missing=True):
    rng = np.random.default_rng(seed)
    hood = rng.choice(["north", "south", "east", "west", "rare1", "rare2"],
                      p=[0.3, 0.3, 0.2, 0.14, 0.03, 0.03], size=n)
    area = rng.uniform(50, 400, size=n)
    year = rng.integers(1900, 2020, size=n)
    baths = rng.integers(1, 4, size=n)
    price = area * 30 + (year - 1900) * 10 + baths * 500 + \
        np.where(hood == "north", 2000, 0) + rng.normal(0, 300, size=n)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["id", "hood", "area", "year", "baths", "price", "unused"])
        for i in range(n):
            a = f"{area[i]:.2f}"
            yv = str(year[i])
            if missing and rng.random() < 0.08:
                a = "NA"
            if missing and rng.random() < 0.05:
                yv = "?"
            w.writerow([i, hood[i], a, yv, str(baths[i]),
                        f"{price[i]:.2f}", "junk"])


SCHEMA = """[columns]
hood = nominal
area = numeric
year = numeric
baths = numeric
price = numeric
[outcome]
name = price
log_transform = false
[pattern:size]
columns = area
[pattern:age]
columns = year, hood
"""


def realdata_cfg(out, extra=""):
    return ("[realdata]\nn_replicates = 1\nks = 1-3\nv = 4\n"
            "forest_trees = 8\nforest_min_leaf = 10\n"
            f"out_dir = {out}\n" + extra)


def test_realdata_smoke(tmp_path):
    csv_path = tmp_path / "data.csv"
    synthetic_csv(csv_path)
    (tmp_path / "schema.ini").write_text(SCHEMA)
    (tmp_path / "cfg.ini").write_text(realdata_cfg(tmp_path / "out"))
    rc = cli_main(["realdata", "--csv", str(csv_path),
                   "--schema", str(tmp_path / "schema.ini"),
                   "--config", str(tmp_path / "cfg.ini")])
    assert rc == 0
    out = tmp_path / "out"
    assert (out / "tables.tsv").exists()
    assert (out / "manifest.json").exists()
    back = read_records(out)
    assert {r.setting.scenario for r in back} == {"ols", "forest"}
    for r in back:
        assert r.status == STATUS_COMPLETE
        assert math.isfinite(r.down_r2_simple)


def test_realdata_k_invariant_without_missingness(tmp_path):
    """Complete data and amputation disabled: imputation is a no-op, so the
    per-k estimate curves are exactly flat."""
    csv_path = tmp_path / "data.csv"
    synthetic_csv(csv_path, missing=False)
    (tmp_path / "schema.ini").write_text(SCHEMA)
    (tmp_path / "cfg.ini").write_text(
        realdata_cfg(tmp_path / "out", "prop_incomplete = 0\n"))
    rc = cli_main(["realdata", "--csv", str(csv_path),
                   "--schema", str(tmp_path / "schema.ini"),
                   "--config", str(tmp_path / "cfg.ini")])
    assert rc == 0
    for r in read_records(tmp_path / "out"):
        assert len(set(r.est_during)) == 1
        assert len(set(r.est_before)) == 1
        assert len(set(r.truth)) == 1


def test_realdata_rejects_bad_outcome_rows(tmp_path):
    csv_path = tmp_path / "data.csv"
    synthetic_csv(csv_path, n=50, missing=False)
    # append rows with a missing and a non-numeric outcome
    with open(csv_path, "a", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([99, "north", "100.0", "1990", "NA", "junk"])
        w.writerow([98, "south", "100.0", "1990", "abc", "junk"])
    from mdcv.bench.realdata import load_csv, load_schema
    (tmp_path / "schema.ini").write_text(SCHEMA)
    schema = load_schema(tmp_path / "schema.ini")
    frame, rejected = load_csv(csv_path, schema)
    assert frame.n_rows == 50
    assert rejected == 2


def test_lump_rare_levels(tmp_path):
    from mdcv.bench.realdata import OTHER_LEVEL, lump_rare_levels
    from mdcv.frame import Column, Frame
    g = Column.nominal("g", [0] * 12 + [1] * 6 + [2] + [3],
                       levels=("a", "b", "c", "d"))
    y = Column.numeric("y", np.arange(20.0))
    train = Frame((y, g), outcome_name="y")
    test = Frame((Column.numeric("y", [0.0]),
                  Column.nominal("g", [2], levels=("a", "b", "c", "d"))),
                 outcome_name="y")
    lt, ls = lump_rare_levels(train, test, threshold=0.10)
    assert lt.column("g").levels == ("a", "b", OTHER_LEVEL)
    assert ls.column("g").values[0] == 2  # "c" collapsed into the catch-all
    assert lt.column("g").values.tolist().count(2) == 2
