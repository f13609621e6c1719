import numpy as np

from orbitlab.compactness import AnalysisConfig
from orbitlab.gallery import (
    GalleryConfig,
    RandomCase,
    check_matrix_case,
    random_power_bounded,
    run_example1,
    run_matrix_suite,
    run_mth_root,
)
from orbitlab.operators import MatrixOperator


def test_identity_matrix_case_passes():
    case = RandomCase(MatrixOperator(np.eye(3)), np.eye(3), 3)
    res = check_matrix_case(case, np.random.default_rng(0), AnalysisConfig((1.0, 0.5), (32, 64), 8))
    assert res["ok"], res


def test_random_generator_properties():
    rng = np.random.default_rng(3)
    for _ in range(20):
        case = random_power_bounded(rng)
        assert 1 <= case.T.dim <= 8 and np.linalg.cond(case.S) <= 10 + 1e-9
        ev = np.abs(np.linalg.eigvals(case.T.entries))
        assert np.sum(np.isclose(ev, 1.0, atol=1e-8)) == case.k


def test_small_matrix_suite():
    rep = run_matrix_suite(seed=1, trials=10)
    assert rep.passed, rep.checks


def test_mth_root_two():
    rep = run_mth_root(2, GalleryConfig(run_witness=False))
    assert rep.passed, rep.checks
    assert rep.details["D1_for_c0_vector"] in ("COMPACT_CERTIFIED", "COMPACT_EVIDENCE")


def test_example1_small_oracle():
    rep = run_example1(1.0, GalleryConfig(oracle_pairs=50, run_witness=False))
    assert rep.passed, rep.checks
    assert abs(rep.details["distance_lag1"] - 0.958851077208406) < 1e-12
