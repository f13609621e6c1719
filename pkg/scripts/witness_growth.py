#!/usr/bin/env python3
"""How far the c0-copy construction gets as the candidate horizon grows.

For each horizon 2^j the pipeline is run on the dyadic diagonal operator and
x = (1, 1, ...); the reached stage, log2 of the exponents and the stage
residuals are printed.  usage: python3 scripts/witness_growth.py [--m 8]
"""
import argparse
import math

from orbitlab import seqspace as ss
from orbitlab.compactness import AnalysisConfig
from orbitlab.errors import Exhausted
from orbitlab.operators import DiagonalOperator
from orbitlab.witness import WitnessConfig, run_pipeline


def run():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--m", type=int, default=8)
    ap.add_argument("--log2", type=int, nargs="*", default=[8, 12, 20, 24, 32, 40, 48, 56, 62])
    args = ap.parse_args()
    op = DiagonalOperator.dyadic()
    analysis = AnalysisConfig(horizons=(64, 128, 256, 512, 1024))
    for j in args.log2:
        cfg = WitnessConfig(horizon=2**j, m_target=args.m, analysis=analysis)
        try:
            _, state, cert = run_pipeline(op, ss.ones(), cfg)
            status, ks, sig = "OK", cert.k_seq, cert.sigma_residuals
            extra = f"M'={cert.M_prime:.4f} partial={cert.partial_sum_bound:.4f} c_low={cert.c_low:.3g}"
        except Exhausted as exc:
            part = exc.partial
            status = f"EXHAUSTED@stage{exc.details.get('stage')}"
            ks = part.k_seq if part else []
            sig = part.sigma_residuals if part else []
            extra = f"best_tol={exc.details.get('best_tol', float('nan')):.3g}"
        logs = [int(math.log2(k)) if k & (k - 1) == 0 else round(math.log2(k), 2) for k in ks]
        sig_s = ", ".join(f"{s:.3g}" for s in sig)
        print(f"H=2^{j:<3d} {status:18s} m={len(ks)} log2(k)={logs} sigma=[{sig_s}] {extra}")
    return 0


if __name__ == "__main__":
    raise SystemExit(run())
