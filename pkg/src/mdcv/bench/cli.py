"""Command-line entry points.

    mdcv simulate  --config cfg.ini [--workers N] [--seed S]
    mdcv summarize --records DIR [--out DIR]
    mdcv emit      --records DIR --out DIR
    mdcv realdata  --csv data.csv --schema schema.ini --config cfg.ini

Exit code 0 only if every scheduled replicate completed.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

from .config import load_config
from .emit import emit_outputs
from .realdata import load_realdata_config, run_realdata
from .records import STATUS_COMPLETE, read_records, write_records
from .runner import run_and_persist, write_manifest
from .summary import summarize


def _all_complete(records) -> bool:
    return all(r.status == STATUS_COMPLETE for r in records)


def cmd_simulate(args) -> int:
    config = load_config(args.config)
    overrides = {}
    if args.workers is not None:
        overrides["workers"] = args.workers
    if args.seed is not None:
        overrides["base_seed"] = args.seed
    if args.out is not None:
        overrides["out_dir"] = args.out
    if overrides:
        config = dataclasses.replace(config, **overrides)
    records = run_and_persist(config)
    rows = summarize(records)
    emit_outputs(rows, records, config.out_dir)
    n_failed = sum(r.status != STATUS_COMPLETE for r in records)
    print(f"completed {len(records) - n_failed}/{len(records)} replicates "
          f"-> {config.out_dir}")
    return 0 if n_failed == 0 else 1


def cmd_summarize(args) -> int:
    records = read_records(args.records)
    rows = summarize(records)
    out = args.out or args.records
    emit_outputs(rows, records, out)
    for row in rows:
        print(f"{row.label}: bias(during)={row.bias_during:+.5f} "
              f"bias(before)={row.bias_before:+.5f} "
              f"rmse(during)={row.rmse_during:.5f} "
              f"rmse(before)={row.rmse_before:.5f}")
    return 0 if _all_complete(records) else 1


def cmd_emit(args) -> int:
    records = read_records(args.records)
    rows = summarize(records)
    written = emit_outputs(rows, records, args.out)
    for path in written:
        print(path)
    return 0 if _all_complete(records) else 1


def cmd_realdata(args) -> int:
    cfg = load_realdata_config(args.config)
    if args.seed is not None:
        cfg = dataclasses.replace(cfg, base_seed=args.seed)
    if args.out is not None:
        cfg = dataclasses.replace(cfg, out_dir=args.out)
    records, rows, meta = run_realdata(args.csv, args.schema, cfg)
    out = Path(cfg.out_dir)
    write_records(records, out)
    emit_outputs(rows, records, out)
    import json
    with open(out / "manifest.json", "w") as fh:
        json.dump({"config_text": cfg.raw_text, **meta,
                   "completed": sum(r.status == STATUS_COMPLETE for r in records),
                   "scheduled": len(records)}, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"rows={meta['rows']} rejected={meta['rejected_rows']} "
          f"records={len(records)} -> {out}")
    return 0 if _all_complete(records) else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mdcv")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run the simulation grid")
    p.add_argument("--config", required=True)
    p.add_argument("--workers", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("summarize", help="summarize persisted records")
    p.add_argument("--records", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_summarize)

    p = sub.add_parser("emit", help="re-emit tables and curve data")
    p.add_argument("--records", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_emit)

    p = sub.add_parser("realdata", help="run the real-data harness")
    p.add_argument("--csv", required=True)
    p.add_argument("--schema", required=True)
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_realdata)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
