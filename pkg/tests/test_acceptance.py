"""Acceptance criteria 1-8.

Each test prints (and records for the terminal summary) one line of the form
``criterion N [title]: PASS|FAIL (seconds) detail``.  Run the file directly
(``python3 tests/test_acceptance.py``) to get just those eight lines.
"""

from __future__ import annotations

import math
import os
import time
from pathlib import Path

import numpy as np
import pytest
from scipy.linalg import subspace_angles

from orbitlab import report
from orbitlab import seqspace as ss
from orbitlab.cli import main as cli_main
from orbitlab.compactness import (
    DEFAULT_EPS_GRID,
    DEFAULT_HORIZONS,
    AnalysisConfig,
    LagFamily,
    PointSetFamily,
    Verdict,
    diff_family,
    greedy_net,
    orbit_family,
    verdict,
)
from orbitlab.errors import NotPowerBounded
from orbitlab.gallery import GalleryConfig, random_power_bounded, run_diagonal_c, run_example1, run_mth_root
from orbitlab.jdlg import jdlg_project
from orbitlab.operators import DiagonalOperator, Example1Operator, apply_power, example1_orbit_distance
from orbitlab.witness import WitnessConfig, recheck_sigma, run_pipeline, telescope_check

SQRT2 = math.sqrt(2.0)
_LOG: list = []


@pytest.fixture
def log(acceptance_log):
    return acceptance_log


def _criterion(log, n: int, title: str, limit_s: float, body):
    start = time.perf_counter()
    try:
        detail = body()
        elapsed = time.perf_counter() - start
        assert elapsed < limit_s, f"runtime {elapsed:.1f}s exceeds {limit_s}s"
        ok = True
    except AssertionError as exc:
        elapsed = time.perf_counter() - start
        ok, detail = False, str(exc).splitlines()[0] if str(exc) else "assertion failed"
    line = f"criterion {n} [{title}]: {'PASS' if ok else 'FAIL'} ({elapsed:.1f}s) {detail}"
    print(line)
    log.append(line)
    if not ok:
        pytest.fail(line)


# -- 1 -------------------------------------------------------------------------------------

def _telescoping():
    rng = np.random.default_rng(20240101)
    worst = 0.0
    for _ in range(1000):
        case = random_power_bounded(rng)
        x = rng.normal(size=case.T.dim) + 1j * rng.normal(size=case.T.dim)
        n, m = int(rng.integers(0, 17)), int(rng.integers(1, 7))
        worst = max(worst, telescope_check(case.T, x, n, m))
    assert worst <= 1e-12, f"matrix residual {worst!r} > 1e-12"
    dy = DiagonalOperator.dyadic()
    pairs = [(int(rng.integers(0, 2**20)), int(rng.integers(1, 7))) for _ in range(200)] + [(2**61, 5)]
    dyadic = [telescope_check(dy, ss.ones(), n, m) for n, m in pairs]
    assert all(r == 0.0 for r in dyadic), f"dyadic residual {max(dyadic)!r} != 0"
    return f"max matrix residual {worst:.3g} over 1000 cases; dyadic residual exactly 0 on {len(pairs)} cases"


def test_criterion_1_telescoping(log):
    _criterion(log, 1, "telescoping", 10.0, _telescoping)


# -- 2 -------------------------------------------------------------------------------------

def _jdlg():
    rng = np.random.default_rng(7)
    idem = comm = angle = 0.0
    for _ in range(200):
        case = random_power_bounded(rng)
        sp = jdlg_project(case.T)
        P, A = sp.P, case.T.entries
        idem = max(idem, float(np.linalg.norm(P @ P - P, 2)))
        comm = max(comm, float(np.linalg.norm(P @ A - A @ P, 2)))
        angle = max(angle, float(np.max(subspace_angles(sp.rv_basis, case.S[:, : case.k]))))
        if case.T.dim > case.k:
            angle = max(angle, float(np.max(subspace_angles(sp.st_basis, case.S[:, case.k:]))))
    assert idem <= 1e-10, f"||P^2 - P|| = {idem!r}"
    assert comm <= 1e-10, f"||PT - TP|| = {comm!r}"
    assert angle <= 1e-7, f"principal angle {angle!r}"
    rejected = 0
    for _ in range(50):
        try:
            jdlg_project(random_power_bounded(rng, jordan=True).T)
        except NotPowerBounded:
            rejected += 1
    assert rejected == 50, f"only {rejected}/50 Jordan cases rejected"
    return (f"200 cases: idempotence {idem:.2g}, commutation {comm:.2g}, max angle {angle:.2g}; "
            "Jordan 50/50 rejected")


def test_criterion_2_jdlg(log):
    _criterion(log, 2, "JdLG decomposition", 30.0, _jdlg)


# -- 3 -------------------------------------------------------------------------------------

def _example1():
    rep = run_example1(1.0, GalleryConfig(oracle_pairs=1000, run_witness=False))
    orb, d1, metric_only = rep.verdicts["orbit"], rep.verdicts["D1"], rep.verdicts["D1_metric_only"]
    assert orb.verdict is Verdict.NOT_COMPACT_EVIDENCE, f"orbit verdict {orb.verdict.value}"
    assert orb.packing.verified_delta >= 1.4142135 - 1e-6, f"orbit delta {orb.packing.verified_delta!r}"
    assert len(orb.packing.witness_indices) >= 64, f"{len(orb.packing.witness_indices)} witnesses"
    assert d1.verdict.is_compact, f"D1 verdict {d1.verdict.value}"
    for eps in (1.0, 0.5, 0.25):
        sizes = {metric_only.entropy.size(eps, h) for h in (2**10, 2**11, 2**12)}
        assert len(sizes) == 1, f"D1 net size at eps={eps} not stable over 2^10..2^12: {sorted(sizes)}"
        assert metric_only.entropy.flags[eps] == "STABLE"
    gap = rep.details["oracle_max_gap"]
    assert gap <= 1e-4, f"oracle gap {gap!r}"
    return (f"orbit delta {orb.packing.verified_delta:.7f} with {len(orb.packing.witness_indices)} witnesses; "
            f"D1 {d1.verdict.value}; oracle gap {gap:.2g} on 1000 pairs")


def test_criterion_3_example1(log):
    _criterion(log, 3, "Example 1 (a=1)", 60.0, _example1)


# -- 4 -------------------------------------------------------------------------------------

def _diagonal_c():
    rep = run_diagonal_c(GalleryConfig(run_witness=False))
    d1, orb = rep.verdicts["D1"], rep.verdicts["orbit"]
    assert d1.verdict is Verdict.COMPACT_CERTIFIED, f"D1 verdict {d1.verdict.value}"
    assert orb.packing is not None, f"orbit verdict {orb.verdict.value}"
    assert orb.packing.verified_delta >= SQRT2 * (1 - 1e-6), f"orbit delta {orb.packing.verified_delta!r}"
    assert len(orb.packing.witness_indices) >= 10
    erg = rep.details["ergodicity"]
    assert erg["N_list"] == [2**j for j in range(4, 13)]
    assert all(v >= 1.0 for v in erg["norm_lo"]), f"Cesaro norms {erg['norm_lo']}"
    for e in erg["coordinate_decay"]:
        if e["k"] == 1:
            assert e["value"] <= 2.0 / (e["N"] * SQRT2), f"coordinate 1 at N={e['N']}: {e['value']!r}"
    assert rep.passed, f"gallery checks {rep.checks}"
    return (f"D1 certified; orbit delta {orb.packing.verified_delta:.7f} with "
            f"{len(orb.packing.witness_indices)} witnesses; Cesaro norm >= 1 for N = 2^4..2^12")


def test_criterion_4_diagonal_c(log):
    _criterion(log, 4, "diagonal operator on c", 30.0, _diagonal_c)


# -- 5 -------------------------------------------------------------------------------------

def _witness():
    op = DiagonalOperator.dyadic()
    cfg = WitnessConfig(m_target=8)
    _, state, cert = run_pipeline(op, ss.ones(), cfg)
    first = report.dumps({"certificate": cert.to_dict(), "state": state.to_dict()})
    _, state2, cert2 = run_pipeline(op, ss.ones(), cfg)
    second = report.dumps({"certificate": cert2.to_dict(), "state": state2.to_dict()})
    assert first == second, "certificate differs between runs"
    assert len(cert.k_seq) == 8, f"reached m = {len(cert.k_seq)}"
    # sigma residuals recomputed by enumerating every subset F
    sigma = recheck_sigma(op, ss.ones(), state)
    for i, s in enumerate(sigma):
        assert s <= 2.0 ** -(i + 1) + 1e-9, f"sigma at m={i + 1} is {s!r}"
    norms = [ss.sup_norm_interval(v).lo for v in cert.x_vectors]
    assert min(norms) >= cert.delta / cert.M - 1e-9, f"min ||x_i|| {min(norms)!r}"
    worst = 0.0
    for mask in range(256):
        idx = [i for i in range(8) if mask >> i & 1]
        if idx:
            s = ss.linear_sum([1.0] * len(idx), [cert.x_vectors[i] for i in idx])
            worst = max(worst, ss.sup_norm_interval(s).hi)
    assert worst <= cert.M_prime + 1e-9, f"subset sum {worst!r} > M' {cert.M_prime!r}"
    assert cert.c_low > 0
    return (f"m = 8, k_8 = {cert.k_seq[-1]}, max sigma ratio "
            f"{max(s * 2 ** (i + 1) for i, s in enumerate(sigma)):.3f}, min norm {min(norms):.4g} >= "
            f"{cert.delta / cert.M:.4g}, subset sums <= {worst:.5g} <= M' {cert.M_prime:.5g}, c_low {cert.c_low:.4g}")


def test_criterion_5_witness(log):
    _criterion(log, 5, "c0-copy witness", 120.0, _witness)


# -- 6 -------------------------------------------------------------------------------------

def _mth_root():
    parts = []
    for m in (2, 3):
        rep = run_mth_root(m, GalleryConfig(run_witness=False))
        dm, d1 = rep.verdicts["Dm"], rep.verdicts["D1"]
        assert dm.verdict is Verdict.COMPACT_CERTIFIED, f"m={m}: Dm verdict {dm.verdict.value}"
        assert d1.verdict is Verdict.NOT_COMPACT_EVIDENCE, f"m={m}: D1 verdict {d1.verdict.value}"
        if m == 2:
            assert d1.diameter_lower >= 4.0 - 1e-6, f"D1 diameter {d1.diameter_lower!r}"
        parts.append(f"m={m}: D_m certified, D_1 diameter {d1.diameter_lower:.6f}")
    return "; ".join(parts)


def test_criterion_6_mth_root(log):
    _criterion(log, 6, "m-th root example", 30.0, _mth_root)


# -- 7 -------------------------------------------------------------------------------------

def _pair_hi(fam, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Upper distances between every index of ``a`` and every index of ``b``."""
    if isinstance(fam, LagFamily):
        return fam.hi[np.abs(a[:, None] - b[None, :])]
    if isinstance(fam, PointSetFamily):
        return np.linalg.norm(fam.points[a][:, None, :] - fam.points[b][None, :, :], axis=2)
    return np.array([fam.dist_many(int(i), b)[1] for i in a])


def _analyzer_families():
    H = DEFAULT_HORIZONS[-1]
    ex = Example1Operator(1.0)
    dy = DiagonalOperator.dyadic()
    one = ss.ones()
    fams = [
        ("example1 orbit", orbit_family(ex, None, H), ("ex", ex, None, 0), 64),
        ("example1 D1", diff_family(ex, None, 1, H), None, None),
        ("diagonal-c orbit", orbit_family(dy, one, H), ("seq", dy, one, 0), None),
        ("diagonal-c D1", diff_family(dy, one, 1, H), None, None),
    ]
    for m in (2, 3):
        op = DiagonalOperator.mth_root(m)
        y = ss.combine(1, apply_power(op, 1, one), -1, one)
        fams.append((f"mth-root-{m} D1", diff_family(op, one, 1, H), ("seq", op, y, 0), None))
        fams.append((f"mth-root-{m} Dm", diff_family(op, one, m, H), None, None))
    case = random_power_bounded(np.random.default_rng(3), dim=4)
    fams.append(("matrix orbit", orbit_family(case.T, np.ones(4), H), None, None))
    return fams


def _independent_min_distance(kind, witnesses):
    """Minimum pairwise lower distance recomputed from the operator, not the family tables."""
    tag, op, y, _ = kind
    w = [int(i) for i in witnesses[:64]]
    best = math.inf
    if tag == "ex":
        for a in range(len(w)):
            for b in range(a):
                best = min(best, example1_orbit_distance(op, w[a], w[b]))
        return best
    pts = [apply_power(op, n, y) for n in w]
    for a in range(len(pts)):
        for b in range(a):
            best = min(best, ss.dist_interval(pts[a], pts[b]).lo)
    return best


def _analyzer():
    H = DEFAULT_HORIZONS[-1]
    packings = coverings = 0
    for name, fam, kind, kmin in _analyzer_families():
        cfg = AnalysisConfig(K_min=kmin) if kmin else AnalysisConfig()
        v = verdict(fam, cfg)
        if v.packing is not None:
            w = np.array(v.packing.witness_indices)
            d = _pair_hi(fam, w, w) if not isinstance(fam, LagFamily) else fam.lo[np.abs(w[:, None] - w[None, :])]
            np.fill_diagonal(d, np.inf)
            assert d.min() >= v.packing.delta, f"{name}: packing pair below delta"
            if kind is not None:
                indep = _independent_min_distance(kind, w)
                assert indep >= v.packing.delta - 1e-12, f"{name}: independent recheck {indep!r}"
            packings += 1
        for eps in DEFAULT_EPS_GRID:
            net = greedy_net(fam, eps, H)
            c = np.array(net.centers)
            for lo in range(0, H, 1024):
                pts = np.arange(lo, min(H, lo + 1024))
                assert _pair_hi(fam, pts, c).min(axis=1).max() <= eps, f"{name}: eps={eps} not covered"
            coverings += 1
        for h in DEFAULT_HORIZONS:
            sizes = [v.entropy.size(e, h) for e in DEFAULT_EPS_GRID]  # eps descending
            assert sizes == sorted(sizes), f"{name}: net size not monotone in eps at horizon {h}"
        for e in DEFAULT_EPS_GRID:
            sizes = [v.entropy.size(e, h) for h in DEFAULT_HORIZONS]
            assert sizes == sorted(sizes), f"{name}: net size not monotone in horizon at eps {e}"
    return f"{packings} packings re-verified, {coverings} coverings checked, monotone on 9 families"


def test_criterion_7_analyzer_soundness(log):
    _criterion(log, 7, "analyzer soundness", 30.0, _analyzer)


# -- 8 -------------------------------------------------------------------------------------

_RUNS = [
    ("gallery", {"gallery": {"id": "example1"}}, []),
    ("gallery", {"gallery": {"id": "diagonal-c"}}, []),
    ("gallery", {"gallery": {"id": "mth-root"}}, ["--m", "2"]),
    ("gallery", {"gallery": {"id": "mth-root"}}, ["--m", "3"]),
    ("gallery", {"gallery": {"id": "matrix-suite", "trials": 30}}, []),
    ("witness", {"operator": {"kind": "diagonal", "rule": "dyadic"}, "vector": {"kind": "ones"}}, []),
]


def _snapshot(root: Path) -> dict:
    return {str(p.relative_to(root)): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


def _determinism(tmp: Path):
    import json

    snaps = []
    old = os.environ.get("ORBITLAB_THREADS")
    try:
        for rep_i, threads in enumerate(("1", "4")):
            os.environ["ORBITLAB_THREADS"] = threads
            root = tmp / f"run{rep_i}"
            for j, (cmd, cfg, extra) in enumerate(_RUNS):
                cfg_path = tmp / f"cfg{j}.json"
                cfg_path.write_text(json.dumps(cfg))
                code = cli_main([cmd, "--config", str(cfg_path), "--out", str(root / f"{j}"), "--seed", "11", *extra])
                assert code == 0, f"{cmd} {cfg} exited {code}"
            snaps.append(_snapshot(root))
    finally:
        if old is None:
            os.environ.pop("ORBITLAB_THREADS", None)
        else:
            os.environ["ORBITLAB_THREADS"] = old
    assert snaps[0].keys() == snaps[1].keys(), "different file sets"
    diff = [k for k in snaps[0] if snaps[0][k] != snaps[1][k]]
    assert not diff, f"files differ between runs: {diff}"
    return f"{len(snaps[0])} JSON/CSV files byte-identical across two runs (1 and 4 threads)"


def test_criterion_8_determinism(log, tmp_path):
    _criterion(log, 8, "determinism", 600.0, lambda: _determinism(tmp_path))


if __name__ == "__main__":  # pragma: no cover
    import tempfile

    for fn, args in [(test_criterion_1_telescoping, ()), (test_criterion_2_jdlg, ()),
                     (test_criterion_3_example1, ()), (test_criterion_4_diagonal_c, ()),
                     (test_criterion_5_witness, ()), (test_criterion_6_mth_root, ()),
                     (test_criterion_7_analyzer_soundness, ())]:
        try:
            fn(_LOG)
        except BaseException:
            pass
    with tempfile.TemporaryDirectory() as d:
        try:
            test_criterion_8_determinism(_LOG, Path(d))
        except BaseException:
            pass
