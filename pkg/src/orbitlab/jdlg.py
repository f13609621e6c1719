"""Reversible/stable splitting of power-bounded operators.

For matrices the projection onto the span of unimodular eigenvectors along
the stable subspace is built from an ordered complex Schur form and one
Sylvester solve.  For unimodular diagonal operators on c the split is known
analytically: the a.a.p. vectors are exactly c0, all of them reversible, so
the projection is the identity there and is not defined off c0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import schur, solve_sylvester

from .errors import (
    NotPowerBounded,
    ProjectionUnavailable,
    SylvesterIllConditioned,
    TolAmbiguous,
    UnsupportedDiagonal,
    UnsupportedOperator,
)
from .operators import (
    BoundProvenance,
    DiagonalOperator,
    Example1Operator,
    MatrixOperator,
    PowerBound,
    apply_power,
    orbit,
    probe_power_norms,
    unit_root,
)
from .seqspace import SeqVec, TailDescriptor, dist_interval, linear_sum, sup_norm_interval, zeros

CLUSTER_RADIUS = 1e-5
RANK_THRESHOLD = 1e-6
RANK_COND_MAX = 1e6
SEP_MIN = 1e-8


@dataclass(frozen=True)
class PeripheralEigenvalue:
    value: complex
    algebraic: int
    geometric: int

    def to_dict(self):
        return {
            "value": [self.value.real, self.value.imag],
            "algebraic_mult": self.algebraic,
            "geometric_mult": self.geometric,
        }


@dataclass(frozen=True)
class SpectralSplit:
    peripheral: tuple
    stable_spectral_radius: float
    tol_unimodular: float

    @property
    def peripheral_count(self) -> int:
        return sum(e.algebraic for e in self.peripheral)

    def to_dict(self):
        return {
            "peripheral_eigs": [e.to_dict() for e in self.peripheral],
            "stable_spectral_radius": self.stable_spectral_radius,
            "tol_unimodular": self.tol_unimodular,
        }


def _clusters(values: np.ndarray, radius: float) -> list[list[int]]:
    groups: list[list[int]] = []
    for i, z in enumerate(values):
        for g in groups:
            if min(abs(z - values[j]) for j in g) <= radius:
                g.append(i)
                break
        else:
            groups.append([i])
    return groups


def check_power_bounded(T: MatrixOperator, tol: float = 1e-9) -> SpectralSplit:
    """Certify power-boundedness from the spectrum.

    Eigenvalues come from the complex Schur form.  Power-bounded iff no
    eigenvalue lies outside the closed unit disk (up to ``tol``) and every
    unimodular eigenvalue is semisimple; the latter is decided by a rank test
    on ``T - mu I`` for each cluster of nearby peripheral eigenvalues.
    """
    if not 1e-12 <= tol <= 1e-6:
        raise ValueError("tol must lie in [1e-12, 1e-6]")
    A = T.entries
    R, _ = schur(A, output="complex")
    eigs = np.diag(R)
    mods = np.abs(eigs)
    outside = mods > 1.0 + tol
    if np.any(outside):
        raise NotPowerBounded(
            "eigenvalue outside the unit disk",
            spectral_radius=float(mods.max()),
        )
    periph_idx = np.flatnonzero(mods >= 1.0 - tol)
    stable = mods[mods < 1.0 - tol]
    norm_a = max(1.0, float(np.linalg.norm(A, 2)))
    peripheral = []
    for group in _clusters(eigs[periph_idx], CLUSTER_RADIUS):
        lam = complex(np.mean(eigs[periph_idx][group]))
        alg = len(group)
        if alg == 1:
            geo = 1
        else:
            sv = np.linalg.svd(A - lam * np.eye(A.shape[0]), compute_uv=False)
            thr = RANK_THRESHOLD * norm_a
            geo = int(np.sum(sv <= thr))
            nonzero = sv[sv > thr]
            if nonzero.size and sv[0] / nonzero.min() > RANK_COND_MAX:
                raise TolAmbiguous(
                    "semisimplicity rank test is ill-conditioned",
                    eigenvalue=[lam.real, lam.imag],
                    rank_condition=float(sv[0] / nonzero.min()),
                )
            geo = min(geo, alg)
        if geo < alg:
            raise NotPowerBounded(
                "defective unimodular eigenvalue (Jordan block)",
                eigenvalue=[lam.real, lam.imag],
                algebraic=alg,
                geometric=geo,
            )
        peripheral.append(PeripheralEigenvalue(lam, alg, geo))
    peripheral.sort(key=lambda e: (round(np.angle(e.value), 12), e.algebraic))
    radius = float(stable.max()) if stable.size else 0.0
    return SpectralSplit(tuple(peripheral), radius, tol)


@dataclass(eq=False)
class JdlgSplit:
    """Projection data. ``kind`` is "matrix" (global P) or "aap_identity"
    (P is the identity on E_aap and undefined elsewhere)."""

    kind: str
    power_bound: PowerBound
    doubly_power_bounded: bool
    P: np.ndarray | None = None
    rv_basis: np.ndarray | None = None
    st_basis: np.ndarray | None = None
    P_norm: float = 1.0
    rv_power_sup: float = 1.0
    spectral: SpectralSplit | None = None
    residuals: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    @property
    def M(self) -> float:
        """max(sup ||T^n|_rv|| over all integers n, sup ||T^n||, ||P||)."""
        return max(self.power_bound.M, self.P_norm, self.rv_power_sup)

    def project(self, v):
        if self.kind == "matrix":
            return self.P @ np.asarray(v, dtype=complex)
        if isinstance(v, SeqVec):
            if not v.is_null:
                raise ProjectionUnavailable("vector is not in c0 = E_aap; P is undefined there")
            return v
        raise ProjectionUnavailable("projection not available for this vector type")

    def co_project(self, v):
        """(I - P) v."""
        if self.kind == "matrix":
            v = np.asarray(v, dtype=complex)
            return v - self.P @ v
        if isinstance(v, SeqVec):
            if not v.is_null:
                raise ProjectionUnavailable("vector is not in c0 = E_aap; I - P is undefined there")
            return zeros(v.d)
        raise ProjectionUnavailable("projection not available for this vector type")

    def to_dict(self):
        out = {
            "kind": self.kind,
            "M": self.M,
            "power_bound": self.power_bound.to_dict(),
            "doubly_power_bounded": self.doubly_power_bounded,
            "P_norm": self.P_norm,
            "rv_power_sup": self.rv_power_sup,
            "residuals": dict(self.residuals),
            "notes": list(self.notes),
        }
        if self.kind == "matrix":
            out["P"] = _cmatrix(self.P)
            out["rv_basis"] = _cmatrix(self.rv_basis)
            out["st_basis"] = _cmatrix(self.st_basis)
            out["rv_dim"] = int(self.rv_basis.shape[1])
            out["st_dim"] = int(self.st_basis.shape[1])
        if self.spectral is not None:
            out["spectral"] = self.spectral.to_dict()
        return out


def _cmatrix(a):
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.atleast_2d(a)]


def _separation(R11, R22) -> float:
    k, m = R11.shape[0], R22.shape[0]
    if k * m <= 1024:
        K = np.kron(np.eye(m), R11) - np.kron(R22.T, np.eye(k))
        return float(np.linalg.svd(K, compute_uv=False).min())
    e1, e2 = np.diag(R11), np.diag(R22)
    return float(np.min(np.abs(e1[:, None] - e2[None, :])))


def _stable_transient(R22, cap: int = 1 << 16) -> float | None:
    """sup_n ||R22^n||, exact once some power has norm <= 1; None if not reached."""
    best, p = 1.0, np.eye(R22.shape[0], dtype=complex)
    for _ in range(cap):
        p = R22 @ p
        nrm = float(np.linalg.norm(p, 2))
        if nrm <= 1.0:
            return best
        best = max(best, nrm)
    return None


def jdlg_project(T: MatrixOperator, tol: float = 1e-9, probe_horizon: int = 512) -> JdlgSplit:
    spectral = check_power_bounded(T, tol)
    A = T.entries
    d = A.shape[0]
    R, Z, k = schur(A, output="complex", sort=lambda z: abs(z) >= 1.0 - tol)
    if k != spectral.peripheral_count:
        raise TolAmbiguous("Schur reordering disagrees with the peripheral classification",
                           sorted=int(k), classified=spectral.peripheral_count)
    R11, R12, R22 = R[:k, :k], R[:k, k:], R[k:, k:]
    if 0 < k < d:
        sep = _separation(R11, R22)
        if sep < SEP_MIN:
            raise SylvesterIllConditioned("peripheral and stable spectra nearly overlap", sep=sep)
        X = solve_sylvester(R11, -R22, -R12)
    else:
        sep = float("inf")
        X = np.zeros((k, d - k), dtype=complex)
    Ps = np.zeros((d, d), dtype=complex)
    Ps[:k, :k] = np.eye(k)
    Ps[:k, k:] = -X
    P = Z @ Ps @ Z.conj().T
    rv_basis = Z[:, :k]
    st_raw = Z @ np.vstack([X, np.eye(d - k)])
    st_basis = np.linalg.qr(st_raw)[0] if d > k else np.zeros((d, 0), dtype=complex)

    # Power bound: T^n = Z W diag(R11^n, R22^n) W^-1 Z^H with W = [[I, X], [0, I]].
    W = np.eye(d, dtype=complex)
    W[:k, k:] = X
    cond_w = float(np.linalg.norm(W, 2) * np.linalg.norm(np.linalg.inv(W), 2))
    if k:
        _, V = np.linalg.eig(R11)
        rv_bound = float(np.linalg.cond(V, 2))
    else:
        rv_bound = 1.0
    st_bound = _stable_transient(R22) if k < d else 1.0
    probe = float(probe_power_norms(T, probe_horizon).max())
    if st_bound is None:
        bound = PowerBound(max(1.0, probe), BoundProvenance.PROBE, probe,
                           notes="stable transient not resolved within 2^16 steps")
    else:
        spectral_M = cond_w * max(rv_bound, st_bound)
        bound = PowerBound(max(1.0, spectral_M, probe), BoundProvenance.SPECTRAL, probe)

    rv_sup = 1.0
    if k:
        inv = np.linalg.inv(R11)
        fwd, bwd = np.eye(k, dtype=complex), np.eye(k, dtype=complex)
        for _ in range(128):
            fwd, bwd = R11 @ fwd, inv @ bwd
            rv_sup = max(rv_sup, float(np.linalg.norm(fwd, 2)), float(np.linalg.norm(bwd, 2)))
    notes = []
    if rv_sup > rv_bound * (1 + 1e-8) + 1e-12:
        notes.append("probe of the reversible restriction exceeded its eigenvector-conditioning bound")
    residuals = {
        "idempotence_fro": float(np.linalg.norm(P @ P - P)),
        "commutation_fro": float(np.linalg.norm(P @ A - A @ P)),
        "sylvester_sep": sep,
    }
    return JdlgSplit(
        kind="matrix",
        power_bound=bound,
        doubly_power_bounded=(k == d),
        P=P,
        rv_basis=rv_basis,
        st_basis=st_basis,
        P_norm=float(np.linalg.norm(P, 2)) if k else 0.0,
        rv_power_sup=max(rv_sup, rv_bound),
        spectral=spectral,
        residuals=residuals,
        notes=notes,
    )


def matrix_power_bound(T: MatrixOperator, tol: float = 1e-9) -> PowerBound:
    try:
        return jdlg_project(T, tol).power_bound
    except (TolAmbiguous, SylvesterIllConditioned) as exc:
        probe = float(probe_power_norms(T, 512).max())
        return PowerBound(max(1.0, probe), BoundProvenance.PROBE, probe, notes=exc.tag)


def diagonal_jdlg(T: DiagonalOperator, d: int = 48) -> JdlgSplit:
    """Analytic split for unimodular diagonals with a_n != lim a_n for all n."""
    if not T.unimodular:
        raise UnsupportedDiagonal("only unimodular diagonals are supported")
    if T.exact:
        if T.rule.num % (1 << 62) == 0:
            raise UnsupportedDiagonal("dyadic numerator too large to keep a_n != b on the head")
    else:
        b = T.rule.limit
        hits = [k for k, z in enumerate(T.rule.entries) if z == b]
        if hits:
            raise UnsupportedDiagonal("a_n equals the limit for some n", coordinates=hits)
    return JdlgSplit(
        kind="aap_identity",
        power_bound=PowerBound(1.0, BoundProvenance.EXACT, notes="unimodular diagonal"),
        doubly_power_bounded=True,
        P_norm=1.0,
        rv_power_sup=1.0,
        notes=[
            "E_aap = E_rv = c0 (unit vectors are unimodular eigenvectors), E_st = {0}, I - P = 0",
            "P is the identity on c0 and undefined on c \\ c0",
            "whether E = c is entirely a.a.p. is decided by the mean-ergodicity probe, not assumed",
        ],
    )


def example1_jdlg(op: Example1Operator) -> JdlgSplit:
    return JdlgSplit(
        kind="aap_identity",
        power_bound=PowerBound(1.0, BoundProvenance.EXACT, notes="translation is an isometry"),
        doubly_power_bounded=True,
        notes=["the shift is an invertible isometry, so E_st = {0} and I - P = 0"],
    )


def split_for(op, tol: float = 1e-9) -> JdlgSplit:
    if isinstance(op, MatrixOperator):
        return jdlg_project(op, tol)
    if isinstance(op, DiagonalOperator):
        return diagonal_jdlg(op)
    if isinstance(op, Example1Operator):
        return example1_jdlg(op)
    raise UnsupportedOperator(f"no split for {type(op).__name__}")


# -- stable part ------------------------------------------------------------------

@dataclass
class ConvergenceReport:
    verdict: str
    residuals: list
    limit_candidate: list | None
    fitted_rate: float | None
    notes: list = field(default_factory=list)

    def to_dict(self):
        return {
            "verdict": self.verdict,
            "residuals": list(self.residuals),
            "limit_candidate": self.limit_candidate,
            "fitted_rate": self.fitted_rate,
            "notes": list(self.notes),
        }


def _fit_rate(res: np.ndarray) -> float | None:
    top = res.max()
    if top <= 0:
        return None
    ok = np.flatnonzero((res > top * 1e-13) & (np.arange(res.size) >= 1))
    if ok.size < 4:
        return None
    ok = ok[ok.size // 2:]
    if ok.size < 2:
        return None
    slope = np.polyfit(ok, np.log(res[ok]), 1)[0]
    return float(np.exp(slope))


def stable_part_convergence(T, split: JdlgSplit, x, n_max: int = 64, tol: float = 1e-8) -> ConvergenceReport:
    """Track s_n = (I-P)(T^n x - x) against its candidate limit -(I-P)x."""
    if n_max < 16:
        raise ValueError("n_max must be >= 16")
    if split.kind != "matrix" or split.st_basis.shape[1] == 0:
        return ConvergenceReport(
            "CONVERGED", [0.0] * (n_max + 1), None, None,
            ["I - P = 0 (no stable part): s_n vanishes identically"],
        )
    x = np.asarray(x, dtype=complex)
    y = split.co_project(x)
    orb = orbit(T, x, n_max)
    res = np.array([np.linalg.norm(split.co_project(v - x) + y) for v in orb])
    half = res[n_max // 2:]
    if res[-1] < tol and half.max() < tol:
        verdict = "CONVERGED"
    elif half.max() >= res[: n_max // 2].max() and res.max() > tol:
        verdict = "NOT_CONVERGED"
    else:
        verdict = "INCONCLUSIVE"
    return ConvergenceReport(
        verdict,
        [float(r) for r in res],
        [[float(z.real), float(z.imag)] for z in -y],
        _fit_rate(res),
    )


# -- Cesaro means -------------------------------------------------------------------

def _mean_of_powers(r: int, D: int, N: int) -> complex:
    """(1/N) sum_{n<N} z^n for z = exp(2*pi*i*r/D), written as a Dirichlet kernel
    exp(i*pi*(N-1)*r/D) * sin(pi*N*r/D) / (N sin(pi*r/D)) to avoid cancelling z - 1."""
    r %= D
    if r == 0:
        return 1 + 0j
    if 2 * r > D:
        r -= D
    num = math.sin(math.pi * (((N * r) % (2 * D)) / D))
    den = N * math.sin(math.pi * (r / D))
    return unit_root((N - 1) * r, 2 * D) * (num / den)


def cesaro_mean(T, x, N: int, method: str = "auto"):
    """A_N x = (1/N) sum_{n<N} T^n x."""
    if not 1 <= N <= 2**20:
        raise ValueError("N must lie in 1..2^20")
    if isinstance(T, MatrixOperator):
        orb = orbit(T, x, N - 1)
        return orb.sum(axis=0) / N
    if not isinstance(T, DiagonalOperator):
        raise UnsupportedOperator("Cesaro means need a matrix or diagonal operator")
    if method == "direct" or (method == "auto" and not T.exact):
        terms = [apply_power(T, n, x) for n in range(N)]
        return linear_sum([1.0 / N] * N, terms)
    if not T.exact:
        raise UnsupportedDiagonal("closed-form Cesaro means need the dyadic rule")
    d = x.d
    head = np.empty(d, dtype=complex)
    for k in range(d):
        head[k] = _mean_of_powers(*T.rule.residue(k, 1), N) * x.head[k]
    gb = _mean_of_powers(*T.rule.limit_residue(1), N)
    L = x.tail.center
    m = abs(T.rule.num) * (N - 1)
    drift = 2.0 * np.sin(np.pi * m / 2 ** (d + 1)) if m <= 2**d else 2.0
    bound = x.tail.bound + abs(L) * float(drift)
    return SeqVec(head, TailDescriptor(x.tail.kind, bound, gb * L))


@dataclass
class ErgodicityReport:
    verdict: str
    N_list: list
    norm_lo: list
    norm_hi: list
    pairwise_lo: list
    coordinate_decay: list
    kernel_dim_head: int | None
    tail_limits: list
    notes: list = field(default_factory=list)

    def to_dict(self):
        return {k: getattr(self, k) for k in (
            "verdict", "N_list", "norm_lo", "norm_hi", "pairwise_lo",
            "coordinate_decay", "kernel_dim_head", "tail_limits", "notes")}


def mean_ergodicity_probe(T, x, N_list, coords: int = 4, tol: float = 1e-9) -> ErgodicityReport:
    N_list = [int(n) for n in N_list]
    if len(N_list) < 4 or any(b <= a for a, b in zip(N_list, N_list[1:])):
        raise ValueError("N_list must be strictly increasing with at least 4 entries")
    means = [cesaro_mean(T, x, N) for N in N_list]
    if isinstance(T, MatrixOperator):
        norms = [float(np.linalg.norm(m)) for m in means]
        pair = [[float(np.linalg.norm(a - b)) for b in means] for a in means]
        scaled = [pair[i][i + 1] * N_list[i] for i in range(len(N_list) - 1)]
        half = len(scaled) // 2
        if pair[-2][-1] <= tol or max(scaled[half:]) <= 2.0 * max(scaled[:half]) + tol:
            verdict = "MEAN_ERGODIC"
        else:
            verdict = "INCONCLUSIVE"
        return ErgodicityReport(verdict, N_list, norms, norms, pair, [], None, [],
                                ["finite-dimensional: distances of consecutive means decay like 1/N"])

    intervals = [sup_norm_interval(m) for m in means]
    pair = [[dist_interval(a, b).lo for b in means] for a in means]
    d = x.d
    decay, decays_ok = [], True
    for N, m in zip(N_list, means):
        for k in range(min(coords, d)):
            ak = T.entry(k)
            value = abs(m.head[k])
            bound = 2.0 * abs(x.head[k]) / (N * abs(ak - 1)) if ak != 1 else None
            if bound is not None and value > bound * (1 + 1e-12) + 1e-15:
                decays_ok = False
            decay.append({"N": N, "k": k, "value": float(value), "bound": bound})
    kernel = len(T.fixed_coordinates(d))
    tails = [[float(m.tail.center.real), float(m.tail.center.imag)] for m in means]
    floor = min(abs(m.tail.center) for m in means)
    notes = [
        "any limit y in c of A_N x has y_k = lim_N (A_N x)_k = 0 for every k with a_k != 1",
    ]
    if abs(T.limit - 1) == 0:
        notes.append("ker(T' - I) contains the limit functional x -> lim x_k, which ker(T - I) = {0} cannot separate")
    exact_rule_free = T.exact and d > abs(T.rule.num).bit_length() + 1
    if kernel == 0 and exact_rule_free and decays_ok and floor > tol:
        verdict = "NOT_MEAN_ERGODIC"
        notes.append(f"||A_N x|| >= {floor:.17g} for every tested N while every coordinate tends to 0")
    elif max(pair[-2][-1], 0.0) <= tol and all(iv.width <= tol for iv in intervals[-2:]):
        verdict = "MEAN_ERGODIC"
    else:
        verdict = "INCONCLUSIVE"
    return ErgodicityReport(
        verdict, N_list,
        [iv.lo for iv in intervals], [iv.hi for iv in intervals],
        pair, decay, kernel, tails, notes,
    )
