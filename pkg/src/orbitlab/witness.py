"""Constructive extraction of a c0-copy from a non-a.a.p. orbit.

Pipeline, for a power-bounded T with (T - I)x a.a.p. but x not a.a.p.:

1. :func:`pbig_extract` -- from a verified delta_0-separated subsequence of the
   orbit, keep exponents n_k whose projected differences P(T^{n_k}x - T^{n_l}x)
   stay >= delta = delta_0 * (1 - margin) apart.
2. :func:`build_k_sequence` -- choose k_1 with ||P(T^{k_1}x - x)|| > delta/M,
   then, at stage m, call :func:`multap_refine` on the 2^m vectors
   P(T^{sum F}x - x), F a subset of {1..m}, to find n_l < n_k with gap > k_m
   along which every one of those vectors returns within 1/(M 2^m); set
   k_{m+1} = n_k - n_l.
3. :func:`bp_certificate` -- form x_i = P(T^{k_i}x - x) and verify the
   Bessaga--Pelczynski hypotheses: terms bounded below, every subset sum
   bounded by M', and positive lower basis constant over sign patterns.

Existence statements become bounded searches; running out of horizon raises
:class:`Exhausted` carrying the partial state.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .compactness import AnalysisConfig, Verdict, diff_family, orbit_family, verdict
from .errors import BPViolation, Exhausted, NoSeparation, ProjectionUnavailable, UnsupportedOperator
from .jdlg import JdlgSplit, split_for
from .operators import DiagonalOperator, Example1Operator, MatrixOperator, apply_power
from .seqspace import SeqVec, combine, dist_interval, sup_norm_interval

TOL_NUM = 1e-9
DYADIC_HORIZON = 2**62
DEFAULT_HORIZON = 2**12
EXHAUSTIVE_CANDIDATES = 2**16


@dataclass(frozen=True)
class SubsetCheck:
    exhaustive_up_to: int = 12
    random_samples: int = 256
    seed: int = 0


@dataclass(frozen=True)
class WitnessConfig:
    horizon: int | None = None  # None: 2**62 for exact dyadic phases, 2**12 otherwise
    m_target: int = 8
    delta_floor: float = 0.0
    margin: float = 0.1
    subset_check: SubsetCheck = SubsetCheck()
    analysis: AnalysisConfig = AnalysisConfig()
    sign_pattern_cap: int = 3**10

    def __post_init__(self):
        if self.m_target < 1:
            raise ValueError("m_target must be >= 1")
        if self.horizon is not None and self.horizon <= self.m_target:
            raise ValueError("horizon must exceed m_target")
        if not 0.0 <= self.margin < 1.0:
            raise ValueError("margin must lie in [0, 1)")

    def resolved_horizon(self, op) -> int:
        if self.horizon is not None:
            return int(self.horizon)
        if isinstance(op, DiagonalOperator) and op.exact:
            return DYADIC_HORIZON
        return DEFAULT_HORIZON


def head_length(horizon: int) -> int:
    """Coordinates k with 2**(k+1) up to ~2**24 * horizon are kept exactly."""
    return max(48, int(horizon).bit_length() + 24)


@dataclass
class WitnessState:
    M: float
    delta: float
    n_subseq: list
    k_seq: list = field(default_factory=list)
    sigma_residuals: list = field(default_factory=list)  # entry i belongs to stage m = i + 1
    stage_pairs: list = field(default_factory=list)  # (n_l, n_k) per stage
    trimmed_prefix: int = 0
    d: int = 48
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "M": self.M,
            "delta": self.delta,
            "n_subseq": [int(n) for n in self.n_subseq],
            "k_seq": [int(k) for k in self.k_seq],
            "sigma_residuals": list(self.sigma_residuals),
            "stage_pairs": [[int(a), int(b)] for a, b in self.stage_pairs],
            "trimmed_prefix": self.trimmed_prefix,
            "head_length": self.d,
            "notes": list(self.notes),
        }


@dataclass
class C0CopyCertificate:
    x_vectors: list
    k_seq: list
    delta: float
    M: float
    norm_lower: float
    delta_over_M: float
    partial_sum_bound: float
    M_prime: float
    c_low: float
    c_high: float
    sigma_residuals: list
    subsets_checked: int
    sign_patterns_checked: int
    disjointness_floor: float

    def to_dict(self) -> dict:
        return {
            "delta": self.delta,
            "M": self.M,
            "k_seq": [int(k) for k in self.k_seq],
            "norm_lower": self.norm_lower,
            "delta_over_M": self.delta_over_M,
            "M_prime": self.M_prime,
            "partial_sum_bound": self.partial_sum_bound,
            "sigma_residuals": list(self.sigma_residuals),
            "basis_constants": {"c_low": self.c_low, "c_high": self.c_high},
            "subsets_checked": self.subsets_checked,
            "sign_patterns_checked": self.sign_patterns_checked,
            "disjointness_floor": self.disjointness_floor,
        }


# -- helpers ------------------------------------------------------------------------------

def _require_diagonal(op) -> DiagonalOperator:
    if isinstance(op, Example1Operator):
        raise UnsupportedOperator("the Example-1 shift exposes only orbit metrics, not vectors")
    if isinstance(op, MatrixOperator):
        raise NoSeparation("orbits of power-bounded matrices are bounded in finite dimension, hence compact")
    if not isinstance(op, DiagonalOperator):
        raise UnsupportedOperator(f"unsupported operator {type(op).__name__}")
    if not op.unimodular:
        raise UnsupportedOperator("the witness search needs a unimodular diagonal")
    return op


def _project(split: JdlgSplit, v: SeqVec) -> SeqVec:
    return split.project(v)


def _diff(op, n: int, x: SeqVec) -> SeqVec:
    """T^n x - x."""
    return combine(1, apply_power(op, n, x), -1, x)


class _LagMetric:
    """max over a list of vectors v_F of ||T^k v_F - v_F||, vectorised in k.

    For a unimodular diagonal this equals max_F ||T^p v_F - T^q v_F|| with
    k = |p - q|, and the max over F commutes with the sup over coordinates.
    """

    def __init__(self, op: DiagonalOperator, vectors):
        self.op = op
        self.d = min(v.d for v in vectors)
        heads = np.array([np.abs(v.head[: self.d]) for v in vectors])
        self.weight = heads.max(axis=0)
        self.centers = np.array([abs(v.tail.center) for v in vectors])
        bounds = []
        for v in vectors:
            spill = float(np.max(np.abs(v.head[self.d:] - v.tail.center), initial=0.0))
            bounds.append(max(v.tail.bound, spill))
        self.bounds = np.array(bounds)
        self._cache: dict[int, tuple[float, float]] = {}

    def __call__(self, ks) -> tuple[np.ndarray, np.ndarray]:
        ks = [int(k) for k in ks]
        todo = sorted({k for k in ks if k not in self._cache})
        if todo:
            lo, hi = self._eval(todo)
            for k, a, b in zip(todo, lo, hi):
                self._cache[k] = (float(a), float(b))
        lo = np.array([self._cache[k][0] for k in ks])
        hi = np.array([self._cache[k][1] for k in ks])
        return lo, hi

    def dense(self, n: int, chunk: int = 4096) -> tuple[np.ndarray, np.ndarray]:
        """(lo, hi) for every lag 0..n-1 as arrays."""
        lo, hi = np.empty(n), np.empty(n)
        for start in range(0, n, chunk):
            ks = list(range(start, min(n, start + chunk)))
            lo[start:start + len(ks)], hi[start:start + len(ks)] = self._eval(ks)
        return lo, hi

    def _eval(self, ks):
        pw = self.op.powers_many(ks, self.d)
        head = (np.abs(pw - 1.0) * self.weight[None, :]).max(axis=1)
        lo, hi = head.copy(), head.copy()
        for i, k in enumerate(ks):
            lim = abs(self.op.limit_power(k) - 1.0)
            drift = self.op.drift_sup(k, self.d)
            lo[i] = max(head[i], float(np.max(lim * self.centers, initial=0.0)))
            hi[i] = max(head[i], float(np.max(lim * self.centers + 2.0 * self.bounds + drift * self.centers,
                                              initial=0.0)))
        return lo, hi


def candidate_exponents(horizon: int) -> list:
    """All exponents below the horizon when that is small, else 0 and the powers of two."""
    if horizon <= EXHAUSTIVE_CANDIDATES:
        return list(range(horizon))
    return [0] + [1 << j for j in range(horizon.bit_length()) if (1 << j) < horizon]


# -- Lemma: separated subsequence -------------------------------------------------------------

def pbig_extract(op, split: JdlgSplit, x, cfg: WitnessConfig = WitnessConfig()):
    """(delta, n_subseq, delta_0, trimmed) with pairwise ||P(T^{n_k}x - T^{n_l}x)|| >= delta (lo)."""
    op = _require_diagonal(op)
    if not isinstance(x, SeqVec):
        raise UnsupportedOperator("diagonal operators act on SeqVec")
    d1 = verdict(diff_family(op, x, 1, cfg.analysis.horizons[-1]), cfg.analysis)
    if not d1.verdict.is_compact:
        raise NoSeparation("(T - I)x does not look a.a.p.; the lemma's hypothesis fails",
                           d1_verdict=d1.verdict.value)
    orb = verdict(orbit_family(op, x, cfg.analysis.horizons[-1]), cfg.analysis)
    if orb.verdict is not Verdict.NOT_COMPACT_EVIDENCE:
        raise NoSeparation("orbit looks relatively compact; no separated subsequence to extract",
                           orbit_verdict=orb.verdict.value)
    delta0 = orb.packing.verified_delta / 2.0
    delta = max(delta0 * (1.0 - cfg.margin), cfg.delta_floor)
    horizon = cfg.resolved_horizon(op)
    d = head_length(horizon)
    x = _pad_or_keep(x, d)
    # P is only defined on c0, so differences of orbit points must lie there.
    if not _diff(op, 1, x).is_null:
        raise ProjectionUnavailable("T x - x is not in c0, so P(T^n x - T^m x) is undefined")
    # I - P = 0 here, so the Cauchy trimming step removes nothing.
    trimmed = 0
    cands = candidate_exponents(horizon)
    kept = []
    lagm = _LagMetric(op, [x])
    if cands == list(range(len(cands))):
        # Contiguous candidates: every lag is below the horizon, so tabulate once.
        lo_table = lagm.dense(len(cands))[0]
        arr = np.empty(len(cands), dtype=np.int64)
        for n in cands:
            c = len(kept)
            if not c or np.all(lo_table[n - arr[:c]] >= delta):
                arr[c] = n
                kept.append(n)
    else:
        for n in cands:
            if not kept or np.all(lagm([n - k for k in kept])[0] >= delta):
                kept.append(n)
    if len(kept) < 2:
        raise NoSeparation("fewer than two separated exponents within the horizon", horizon=horizon)
    return delta, kept, delta0, trimmed


def _pad_or_keep(x: SeqVec, d: int) -> SeqVec:
    if x.d >= d:
        return x
    if x.tail.bound != 0.0:
        raise ProjectionUnavailable("starting vector needs an exact tail to extend its head")
    head = np.full(d, x.tail.center, dtype=complex)
    head[: x.d] = x.head
    return SeqVec(head, x.tail)


# -- Lemma: gap-Cauchy refinement ---------------------------------------------------------------

@dataclass
class RefineResult:
    subsequence: list
    residual: float
    cell_count: int


def multap_refine(op, aap_list, n_seq, tol: float, gap_min: int) -> RefineResult:
    """Indices n'_0 < n'_1 < ... from n_seq, consecutive gaps >= gap_min, along which every
    vector of aap_list moves by at most tol (hi distance).

    Orbit points of the product vector are grouped into cells of hi-radius tol/2 around
    greedily chosen centers; any two members of a cell are within tol.  The cell whose
    gap-compliant chain reaches its second element earliest is returned.
    """
    if not tol > 0:
        raise ValueError("tol must be > 0")
    op = _require_diagonal(op)
    n_seq = sorted(int(n) for n in n_seq)
    metric = _LagMetric(op, list(aap_list))
    contiguous = len(n_seq) > 1 and n_seq[-1] - n_seq[0] == len(n_seq) - 1
    if contiguous:
        # Lags between members of a contiguous range are 0..len-1: tabulate once.
        _, hi_table = metric.dense(len(n_seq))

        def hi_of(lags):
            return hi_table[np.abs(np.asarray(lags))]
    else:
        def hi_of(lags):
            return metric(np.abs(np.asarray(lags)))[1]

    half = tol / 2.0
    centers = np.empty(len(n_seq), dtype=object if not contiguous else np.int64)
    c = 0
    cells: dict[int, list[int]] = {}
    for n in n_seq:
        if c:
            hit = np.flatnonzero(hi_of(n - centers[:c]) <= half)
            if hit.size:
                cells[int(centers[int(hit[0])])].append(n)
                continue
        centers[c] = n
        c += 1
        cells[n] = [n]
    best = None
    for center in centers[:c]:
        members = cells[int(center)]
        chain = [members[0]]
        for n in members[1:]:
            if n - chain[-1] >= gap_min:
                chain.append(n)
        if len(chain) >= 2 and (best is None or chain[1] < best[1]):
            best = chain
    if best is None:
        # Cells are a heuristic grouping; fall back to a direct pairwise scan.
        best_tol, pair = math.inf, None
        if contiguous:
            lags = np.arange(gap_min, len(n_seq))
            if lags.size:
                vals = hi_table[lags]
                best_tol = float(vals.min())
                ok = np.flatnonzero(vals <= tol)
                if ok.size:
                    pair = [n_seq[0], n_seq[0] + int(lags[ok[0]])]
        else:
            for j, nk in enumerate(n_seq):
                lower = [nl for nl in n_seq[:j] if nk - nl >= gap_min]
                if not lower:
                    continue
                vals = hi_of([nk - nl for nl in lower])
                best_tol = min(best_tol, float(vals.min()))
                ok = np.flatnonzero(vals <= tol)
                if ok.size:
                    pair = [lower[int(ok[-1])], nk]
                    break
        if pair is None:
            raise Exhausted("no pair within tolerance at the requested gap", best_tol=best_tol,
                            tol=tol, gap_min=gap_min, candidates=len(n_seq))
        best = pair
    c_count = c
    _, hi = metric([b - a for a, b in zip(best, best[1:])])
    return RefineResult(best, float(hi.max()), c_count)


# -- the inductive construction ---------------------------------------------------------------------

def _subset_vectors(op, x: SeqVec, ks: list) -> list:
    """P(T^{sum F} x - x) for every F subset of the indices of ks (P = identity on c0)."""
    out = []
    for mask in range(1 << len(ks)):
        s = sum(k for i, k in enumerate(ks) if mask >> i & 1)
        out.append(_diff(op, s, x))
    return out


def build_k_sequence(op, split: JdlgSplit, x, cfg: WitnessConfig = WitnessConfig()) -> WitnessState:
    op = _require_diagonal(op)
    delta, n_subseq, _, trimmed = pbig_extract(op, split, x, cfg)
    horizon = cfg.resolved_horizon(op)
    d = head_length(horizon)
    x = _pad_or_keep(x, d)
    M = split.M
    state = WitnessState(M=M, delta=delta, n_subseq=n_subseq, trimmed_prefix=trimmed, d=d)
    floor = delta / M
    base = _LagMetric(op, [x])
    k1 = None
    for k in candidate_exponents(horizon)[1:]:
        if base([k])[0][0] > floor:
            k1 = k
            break
    if k1 is None:
        raise Exhausted("no k_1 with ||P(T^k x - x)|| > delta/M", partial=state, stage=0)
    state.k_seq.append(k1)
    for m in range(1, cfg.m_target):
        vectors = _subset_vectors(op, x, state.k_seq)
        tol = 1.0 / (M * 2**m)
        try:
            ref = multap_refine(op, vectors, n_subseq, tol, state.k_seq[-1] + 1)
        except Exhausted as exc:
            raise Exhausted(f"stage {m}: {exc}", partial=state, stage=m, **exc.details) from None
        nl, nk = ref.subsequence[0], ref.subsequence[1]
        k_next = nk - nl
        norm = sup_norm_interval(_diff(op, k_next, x)).lo
        if norm < floor - TOL_NUM:
            raise BPViolation("separation lost: ||P(T^k x - x)|| < delta/M", stage=m, k=str(k_next), norm=norm)
        sigma = max(dist_interval(apply_power(op, k_next, v), v).hi for v in vectors)
        if sigma > 2.0**-m + TOL_NUM:
            raise BPViolation("stage residual above 2^-m", stage=m, residual=sigma)
        state.k_seq.append(k_next)
        state.sigma_residuals.append(sigma)
        state.stage_pairs.append((nl, nk))
    return state


# -- Bessaga-Pelczynski verification -------------------------------------------------------------------

def _subset_masks(m: int, sc: SubsetCheck) -> np.ndarray:
    rows = []
    for size in range(1, min(m, sc.exhaustive_up_to) + 1):
        for combo in itertools.combinations(range(m), size):
            r = np.zeros(m, dtype=np.int8)
            r[list(combo)] = 1
            rows.append(r)
    if m > sc.exhaustive_up_to and sc.random_samples:
        rng = np.random.default_rng(sc.seed)
        for _ in range(sc.random_samples):
            size = int(rng.integers(sc.exhaustive_up_to + 1, m + 1))
            r = np.zeros(m, dtype=np.int8)
            r[rng.choice(m, size=size, replace=False)] = 1
            rows.append(r)
    return np.array(rows)


def _sign_patterns(m: int, cap: int, seed: int) -> np.ndarray:
    if 3**m <= cap:
        pats = np.array(list(itertools.product((-1, 0, 1), repeat=m)), dtype=float)
    else:
        rng = np.random.default_rng(seed)
        pats = rng.integers(-1, 2, size=(cap, m)).astype(float)
    return pats[np.any(pats != 0, axis=1)]


def _combo_norms(X: np.ndarray, centers: np.ndarray, bounds: np.ndarray, coeffs: np.ndarray):
    heads = coeffs @ X
    head_sup = np.abs(heads).max(axis=1)
    c = np.abs(coeffs @ centers)
    b = np.abs(coeffs) @ bounds
    return np.maximum(head_sup, c), np.maximum(head_sup, c + b)


def bp_certificate(op, split: JdlgSplit, x, state: WitnessState,
                   cfg: WitnessConfig = WitnessConfig()) -> C0CopyCertificate:
    op = _require_diagonal(op)
    if len(state.k_seq) < min(4, cfg.m_target):
        raise Exhausted("too few exponents for a certificate", partial=state)
    x = _pad_or_keep(x, state.d)
    M = state.M
    xs = [_project(split, _diff(op, k, x)) for k in state.k_seq]
    m = len(xs)
    d = min(v.d for v in xs)
    X = np.array([v.head[:d] for v in xs])
    centers = np.array([v.tail.center for v in xs])
    bounds = np.array([max(v.tail.bound, float(np.max(np.abs(v.head[d:] - v.tail.center), initial=0.0)))
                       for v in xs])
    norms = [sup_norm_interval(v).lo for v in xs]
    norm_lower = min(norms)
    floor = state.delta / M
    if norm_lower < floor - TOL_NUM:
        raise BPViolation("a term fell below delta/M", norms=norms, delta_over_M=floor)

    x_norm = sup_norm_interval(x).hi
    masks = _subset_masks(m, cfg.subset_check)
    _, hi = _combo_norms(X, centers, bounds, masks.astype(float))
    # Per-subset bound: sum over all but the smallest index of 2^(1 - i) (1-based) + M|x| + M^2|x|.
    weights = np.array([2.0 ** (1 - (i + 1)) for i in range(m)])
    per_subset = []
    for r in masks:
        idx = np.flatnonzero(r)
        per_subset.append(float(weights[idx[1:]].sum()) + M * x_norm + M * M * x_norm)
    per_subset = np.array(per_subset)
    M_prime = float(weights[1:].sum()) + M * x_norm + M * M * x_norm
    bad = np.flatnonzero(hi > per_subset + TOL_NUM)
    if bad.size:
        r = masks[int(bad[0])]
        raise BPViolation("subset sum exceeds its bound", subset=[int(i) + 1 for i in np.flatnonzero(r)],
                          value=float(hi[bad[0]]), bound=float(per_subset[bad[0]]))
    partial = float(hi.max())
    if partial > M_prime + TOL_NUM:
        raise BPViolation("partial sums exceed M'", value=partial, M_prime=M_prime)

    pats = _sign_patterns(m, cfg.sign_pattern_cap, cfg.subset_check.seed)
    lo, hi_p = _combo_norms(X, centers, bounds, pats)
    scale = np.abs(pats).max(axis=1)
    c_low = float((lo / scale).min())
    c_high = float((hi_p / scale).max())
    if not c_low > 0:
        raise BPViolation("lower basis constant is not positive", c_low=c_low)
    return C0CopyCertificate(
        x_vectors=xs, k_seq=list(state.k_seq), delta=state.delta, M=M, norm_lower=norm_lower,
        delta_over_M=floor, partial_sum_bound=partial, M_prime=M_prime, c_low=c_low, c_high=c_high,
        sigma_residuals=list(state.sigma_residuals), subsets_checked=int(masks.shape[0]),
        sign_patterns_checked=int(pats.shape[0]),
        disjointness_floor=norm_lower - float(sum(state.sigma_residuals)),
    )


def run_pipeline(op, x, cfg: WitnessConfig = WitnessConfig()):
    """(split, state, certificate) for the full construction."""
    op = _require_diagonal(op)
    split = split_for(op)
    state = build_k_sequence(op, split, x, cfg)
    cert = bp_certificate(op, split, x, state, cfg)
    return split, state, cert


def recheck_sigma(op, x: SeqVec, state: WitnessState) -> list:
    """Stage residuals recomputed from scratch by enumerating every F."""
    x = _pad_or_keep(x, state.d)
    out = []
    for m in range(1, len(state.k_seq)):
        vectors = _subset_vectors(op, x, state.k_seq[:m])
        k = state.k_seq[m]
        out.append(max(dist_interval(apply_power(op, k, v), v).hi for v in vectors))
    return out


# -- telescoping identity ----------------------------------------------------------------------------------

def telescope_check(op, x, n: int, m: int) -> float:
    """|| (T^{n+m}x - T^n x) - sum_{j<m} (T^{n+j+1}x - T^{n+j}x) ||.

    Exact dyadic diagonals: the integer coefficient of every power T^e x is
    collected first, so the residual is the norm of an exactly-cancelled
    combination.  Matrices: both sides evaluated in floating point.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    if isinstance(op, DiagonalOperator) and op.exact:
        coeff: dict[int, int] = {}
        for e, c in [(n + m, 1), (n, -1)]:
            coeff[e] = coeff.get(e, 0) + c
        for j in range(m):
            coeff[n + j + 1] = coeff.get(n + j + 1, 0) - 1
            coeff[n + j] = coeff.get(n + j, 0) + 1
        live = [(e, c) for e, c in sorted(coeff.items()) if c != 0]
        if not live:
            return 0.0
        acc = None
        for e, c in live:
            term = apply_power(op, e, x)
            acc = term if acc is None else combine(1, acc, c, term)
        return sup_norm_interval(acc).hi
    if isinstance(op, DiagonalOperator):
        left = combine(1, apply_power(op, n + m, x), -1, apply_power(op, n, x))
        right = None
        for j in range(m):
            step = combine(1, apply_power(op, n + j + 1, x), -1, apply_power(op, n + j, x))
            right = step if right is None else combine(1, right, 1, step)
        return sup_norm_interval(combine(1, left, -1, right)).hi
    if isinstance(op, MatrixOperator):
        A = op.entries
        x = np.asarray(x, dtype=complex)
        left = np.linalg.matrix_power(A, n + m) @ x - np.linalg.matrix_power(A, n) @ x
        cur = np.linalg.matrix_power(A, n) @ x
        right = np.zeros_like(x)
        for _ in range(m):
            nxt = A @ cur
            right += nxt - cur
            cur = nxt
        return float(np.linalg.norm(left - right))
    if isinstance(op, Example1Operator):
        t = np.linspace(0.0, 64.0, 257)[:, None]
        scale = 2.0 ** np.arange(48)[None, :]

        def point(e):
            return np.sin((t + e * op.a) / scale)

        left = point(n + m) - point(n)
        right = sum(point(n + j + 1) - point(n + j) for j in range(m))
        return float(np.max(np.abs(left - right)))
    raise UnsupportedOperator(f"unsupported operator {type(op).__name__}")

