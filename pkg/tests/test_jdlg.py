import numpy as np
import pytest
from scipy.linalg import subspace_angles

from orbitlab import seqspace as ss
from orbitlab.errors import NotPowerBounded, ProjectionUnavailable
from orbitlab.gallery import random_power_bounded
from orbitlab.jdlg import (
    cesaro_mean,
    check_power_bounded,
    diagonal_jdlg,
    jdlg_project,
    mean_ergodicity_probe,
    split_for,
    stable_part_convergence,
)
from orbitlab.operators import BoundProvenance, DiagonalOperator, MatrixOperator, power_norm_bound


def test_identity_is_all_peripheral():
    s = check_power_bounded(MatrixOperator(np.eye(3)))
    assert s.peripheral_count == 3
    sp = jdlg_project(MatrixOperator(np.eye(3)))
    assert np.allclose(sp.P, np.eye(3)) and sp.doubly_power_bounded


def test_jordan_block_rejected():
    with pytest.raises(NotPowerBounded):
        jdlg_project(MatrixOperator(np.array([[1.0, 1.0], [0.0, 1.0]])))


def test_diag_projection_and_stable_rate():
    T = MatrixOperator(np.diag([1.0, 0.5]))
    sp = jdlg_project(T)
    assert np.allclose(sp.P, np.diag([1, 0]), atol=1e-14)
    rep = stable_part_convergence(T, sp, np.array([0.0, 1.0]))
    assert rep.verdict == "CONVERGED"
    assert np.allclose(rep.residuals[:10], 0.5 ** np.arange(10), atol=1e-15)


@pytest.mark.parametrize("r", [0.3, 0.6, 0.8])
def test_fitted_rate_within_five_percent(r):
    rng = np.random.default_rng(1)
    Q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
    T = MatrixOperator(Q @ np.diag([1.0, r, 0.1]) @ Q.T)
    rep = stable_part_convergence(T, jdlg_project(T), rng.normal(size=3), n_max=64)
    assert abs(rep.fitted_rate - r) <= 0.05 * r


def test_construct_then_recover():
    rng = np.random.default_rng(11)
    for _ in range(25):
        case = random_power_bounded(rng)
        sp = jdlg_project(case.T)
        A = case.T.entries
        assert np.linalg.norm(sp.P @ sp.P - sp.P) <= 1e-10
        assert np.linalg.norm(sp.P @ A - A @ sp.P) <= 1e-10
        assert np.max(subspace_angles(sp.rv_basis, case.S[:, : case.k])) <= 1e-7
        if case.T.dim > case.k:
            assert np.max(subspace_angles(sp.st_basis, case.S[:, case.k:])) <= 1e-7
        pb = sp.power_bound
        probe = max(np.linalg.norm(np.linalg.matrix_power(A, n), 2) for n in range(0, 200, 7))
        assert pb.M >= probe * (1 - 1e-9)


def test_power_bound_provenance():
    assert power_norm_bound(DiagonalOperator.dyadic()).provenance is BoundProvenance.EXACT
    T = MatrixOperator(np.array([[0.9, 1.0], [0.0, 0.9]]))
    pb = power_norm_bound(T)
    assert pb.M >= 3.9 and pb.provenance is BoundProvenance.SPECTRAL


def test_diagonal_split_domain():
    sp = diagonal_jdlg(DiagonalOperator.dyadic())
    assert sp.doubly_power_bounded and sp.M == 1.0
    with pytest.raises(ProjectionUnavailable):
        sp.project(ss.ones())
    assert sp.project(ss.basis(2)).same_as(ss.basis(2))
    assert split_for(DiagonalOperator.dyadic()).kind == "aap_identity"


@pytest.mark.parametrize("N", [1, 2, 3, 16, 100, 1000, 1024])
def test_cesaro_closed_form_matches_direct(N):
    for op in (DiagonalOperator.dyadic(), DiagonalOperator.mth_root(3), DiagonalOperator.dyadic(3, True)):
        a = cesaro_mean(op, ss.ones(), N)
        b = cesaro_mean(op, ss.ones(), N, method="direct")
        assert np.max(np.abs(a.head - b.head)) <= 1e-10
        assert abs(a.tail.center - b.tail.center) <= 1e-10


def test_not_mean_ergodic_on_c():
    op = DiagonalOperator.dyadic()
    N_list = [2**j for j in range(4, 13)]
    rep = mean_ergodicity_probe(op, ss.ones(), N_list)
    assert rep.verdict == "NOT_MEAN_ERGODIC"
    assert all(v >= 1.0 for v in rep.norm_lo)
    for e in rep.coordinate_decay:
        if e["k"] == 1:
            assert e["value"] <= 2 / (e["N"] * np.sqrt(2)) + 1e-15


def test_matrix_mean_ergodic():
    T = MatrixOperator(np.diag([1.0, -1.0, 0.5]))
    rep = mean_ergodicity_probe(T, np.ones(3), [16, 32, 64, 128, 256])
    assert rep.verdict == "MEAN_ERGODIC"
