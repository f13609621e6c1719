#!/usr/bin/env python3
"""Run every gallery example through the CLI and print a one-line summary each.

usage: python3 scripts/run_gallery.py [--out results/gallery] [--seed 0]
"""
import argparse
import json
import tempfile
import time
from pathlib import Path

from orbitlab.cli import main

RUNS = [
    ("example1", {"gallery": {"id": "example1", "a": 1.0}}, []),
    ("diagonal-c", {"gallery": {"id": "diagonal-c"}}, []),
    ("mth-root-2", {"gallery": {"id": "mth-root"}}, ["--m", "2"]),
    ("mth-root-3", {"gallery": {"id": "mth-root"}}, ["--m", "3"]),
    ("matrix-suite", {"gallery": {"id": "matrix-suite", "trials": 100}}, []),
]


def run():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="results/gallery")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    out = Path(args.out)
    worst = 0
    with tempfile.TemporaryDirectory() as tmp:
        for name, cfg, extra in RUNS:
            cfg_path = Path(tmp) / f"{name}.json"
            cfg_path.write_text(json.dumps(cfg))
            t0 = time.perf_counter()
            code = main(["gallery", "--config", str(cfg_path), "--out", str(out / name),
                         "--seed", str(args.seed), *extra])
            rep = json.loads((out / name / "report.json").read_text())
            failed = [k for k, v in rep["checks"].items() if not v]
            print(f"{name:14s} exit={code} {time.perf_counter() - t0:6.1f}s "
                  f"verdicts={ {k: v['verdict'] for k, v in rep['verdicts'].items()} } "
                  f"failed_checks={failed}")
            worst = max(worst, code)
    return worst


if __name__ == "__main__":
    raise SystemExit(run())
