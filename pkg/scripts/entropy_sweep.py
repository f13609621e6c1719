#!/usr/bin/env python3
"""Covering numbers N(eps, H) of the gallery families over a horizon sweep.

Writes one CSV (family,eps,horizon,net_size,covering_radius) and prints the
flags per family.  usage: python3 scripts/entropy_sweep.py [--max-log2 13]
"""
import argparse
from pathlib import Path

import numpy as np

from orbitlab import report
from orbitlab import seqspace as ss
from orbitlab.compactness import DEFAULT_EPS_GRID, diff_family, entropy_table, orbit_family
from orbitlab.operators import DiagonalOperator, Example1Operator


def families(H):
    ex = Example1Operator(1.0)
    dy = DiagonalOperator.dyadic()
    yield "example1/orbit", orbit_family(ex, None, H)
    yield "example1/D1", diff_family(ex, None, 1, H)
    yield "diagonal-c/orbit", orbit_family(dy, ss.ones(), H)
    yield "diagonal-c/D1", diff_family(dy, ss.ones(), 1, H)
    for m in (2, 3):
        op = DiagonalOperator.mth_root(m)
        yield f"mth-root-{m}/D1", diff_family(op, ss.ones(), 1, H)
        yield f"mth-root-{m}/D{m}", diff_family(op, ss.ones(), m, H)


def run():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--min-log2", type=int, default=6)
    ap.add_argument("--max-log2", type=int, default=13)
    ap.add_argument("--out", default="results/entropy_sweep.csv")
    args = ap.parse_args()
    horizons = tuple(2**j for j in range(args.min_log2, args.max_log2 + 1))
    rows = []
    for name, fam in families(horizons[-1]):
        tab = entropy_table(fam, DEFAULT_EPS_GRID, horizons)
        for c in tab.cells:
            rows.append((name, c.eps, c.horizon, c.net_size, c.covering_radius))
        flags = " ".join(f"{e:g}:{tab.flags[e]}" for e in DEFAULT_EPS_GRID)
        top = " ".join(str(tab.size(e, horizons[-1])) for e in DEFAULT_EPS_GRID)
        print(f"{name:20s} {flags}   N(eps, {horizons[-1]}) = {top}")
    report.atomic_write(Path(args.out), report.csv_text(
        ("family", "eps", "horizon", "net_size", "covering_radius"), rows))
    print(f"wrote {args.out} ({len(rows)} rows)")
    return 0


if __name__ == "__main__":
    np.seterr(all="raise")
    raise SystemExit(run())
