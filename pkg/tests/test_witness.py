import numpy as np
import pytest

from orbitlab import seqspace as ss
from orbitlab.compactness import AnalysisConfig
from orbitlab.errors import Exhausted, NoSeparation, ProjectionUnavailable, UnsupportedOperator
from orbitlab.jdlg import split_for
from orbitlab.operators import DiagonalOperator, Example1Operator, MatrixOperator
from orbitlab.witness import (
    WitnessConfig,
    _LagMetric,
    _subset_vectors,
    candidate_exponents,
    head_length,
    multap_refine,
    pbig_extract,
    recheck_sigma,
    run_pipeline,
    telescope_check,
)

FAST = AnalysisConfig(horizons=(64, 128, 256, 512, 1024))


@pytest.fixture(scope="module")
def pipeline():
    op = DiagonalOperator.dyadic()
    split, state, cert = run_pipeline(op, ss.ones(), WitnessConfig())
    return op, state, cert


def test_candidates_and_head_length():
    assert candidate_exponents(10) == list(range(10))
    c = candidate_exponents(2**20)
    assert c[0] == 0 and c[-1] == 2**19 and len(c) == 21
    assert head_length(2**62) == 87 and head_length(16) == 48


def test_pbig_dyadic():
    op = DiagonalOperator.dyadic()
    delta, kept, delta0, trimmed = pbig_extract(op, split_for(op), ss.ones(), WitnessConfig(analysis=FAST))
    assert delta0 == 1.0 and abs(delta - 0.9) < 1e-15 and trimmed == 0
    metric = _LagMetric(op, [ss.pad(ss.ones(), head_length(2**62))])
    for i, n in enumerate(kept[:20]):
        lags = [n - k for k in kept[:i]]
        if lags:
            assert np.all(metric(lags)[0] >= delta)


@pytest.mark.parametrize("op,x,exc", [
    (MatrixOperator(np.eye(3)), np.ones(3), NoSeparation),
    (DiagonalOperator.dyadic(), ss.basis(2), NoSeparation),
    (Example1Operator(1.0), None, UnsupportedOperator),
])
def test_pbig_refuses(op, x, exc):
    split = None if isinstance(op, (MatrixOperator, Example1Operator)) else split_for(op)
    with pytest.raises(exc):
        pbig_extract(op, split, x, WitnessConfig(analysis=FAST))


def test_sign_flip_diagonal_refused():
    op = DiagonalOperator.dyadic(1, True)
    with pytest.raises((NoSeparation, ProjectionUnavailable)):
        pbig_extract(op, split_for(op), ss.ones(), WitnessConfig(analysis=FAST))


def test_multap_zero_vectors_trivial():
    ref = multap_refine(DiagonalOperator.dyadic(), [ss.zeros(48)], range(100), 0.1, 5)
    assert ref.residual == 0.0 and ref.subsequence[1] - ref.subsequence[0] >= 5


def test_multap_agrees_with_exhaustive_scan():
    op = DiagonalOperator.dyadic()
    vecs = _subset_vectors(op, ss.ones(48), [1, 32])
    H, tol, gap = 4096, 0.25, 33
    _, hi = _LagMetric(op, vecs).dense(H)
    ref = multap_refine(op, vecs, range(H), tol, gap)
    assert ref.residual <= tol
    assert all(b - a >= gap for a, b in zip(ref.subsequence, ref.subsequence[1:]))
    assert np.flatnonzero(hi[gap:] <= tol).size > 0


def test_multap_exhausted_reports_best():
    op = DiagonalOperator.dyadic()
    with pytest.raises(Exhausted) as info:
        multap_refine(op, [ss.ones(48)], range(8), 1e-6, 1)
    assert info.value.details["best_tol"] > 1e-6


def test_small_horizon_exhausts_with_partial():
    op = DiagonalOperator.dyadic()
    with pytest.raises(Exhausted) as info:
        run_pipeline(op, ss.ones(), WitnessConfig(horizon=16, analysis=FAST))
    assert info.value.partial is not None and len(info.value.partial.k_seq) >= 1


def test_pipeline_invariants(pipeline):
    op, state, cert = pipeline
    assert len(cert.k_seq) == 8
    assert cert.k_seq == sorted(set(cert.k_seq))
    for i, s in enumerate(cert.sigma_residuals):
        assert s <= 2.0 ** -(i + 1) + 1e-9
    assert cert.norm_lower >= cert.delta / cert.M - 1e-9
    assert cert.partial_sum_bound <= cert.M_prime + 1e-9
    assert cert.c_low > 0 and cert.subsets_checked == 255  # every nonempty subset; the empty sum is 0


def test_sigma_recheck_matches(pipeline):
    op, state, cert = pipeline
    again = recheck_sigma(op, ss.ones(), state)
    assert np.allclose(again, state.sigma_residuals, rtol=0, atol=1e-12)


@pytest.mark.parametrize("n,m", [(0, 1), (5, 6), (1023, 17), (2**40, 3)])
def test_telescope_dyadic_exact(n, m):
    assert telescope_check(DiagonalOperator.dyadic(), ss.ones(), n, m) == 0.0


def test_telescope_matrix_and_example1():
    T = MatrixOperator(np.array([[0.0, -1.0], [1.0, 0.0]]) * 0.99)
    assert telescope_check(T, np.array([1.0, 2.0]), 7, 5) <= 1e-12
    assert telescope_check(Example1Operator(1.0), None, 3, 4) <= 1e-12
    with pytest.raises(ValueError):
        telescope_check(T, np.ones(2), 1, 0)


def test_config_validation():
    with pytest.raises(ValueError):
        WitnessConfig(m_target=0)
    with pytest.raises(ValueError):
        WitnessConfig(horizon=4, m_target=8)
