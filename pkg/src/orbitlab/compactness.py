"""Relative-compactness analysis of indexed point families.

A family is a finite prefix ``{z_0, z_1, ..., z_{H-1}}`` of an infinite
sequence of points (an orbit, a difference orbit) together with a metric that
returns an interval ``[lo, hi]`` enclosing each pairwise distance.  Packing
decisions use ``lo`` and covering decisions use ``hi``, so both are sound.

Verdicts are graded:

* ``COMPACT_CERTIFIED`` -- an analytic argument covers *every* member (a
  decreasing tail envelope in c0, or boundedness in finite dimension);
* ``COMPACT_EVIDENCE`` -- all epsilon-nets stopped growing over the sampled
  horizons;
* ``NOT_COMPACT_EVIDENCE`` -- a verified delta-separated set of at least
  ``K_min`` points that keeps growing with the horizon;
* ``UNKNOWN`` otherwise.

Greedy nets and packings scan indices in ascending order, so the result on a
horizon ``H`` is a prefix of the result on any larger horizon.  Entropy tables
exploit this: one scan at the largest horizon serves every smaller one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import FamilyConstructionError
from .operators import (
    BoundProvenance,
    DiagonalOperator,
    Example1Operator,
    MatrixOperator,
    apply_power,
    example1_diff_envelope,
    example1_distance_table,
    orbit,
    power_norm_bound,
)
from .parallel import pmap
from .seqspace import SeqVec, TailDescriptor, TailKind, combine, dist_interval, sup_norm_interval

DEFAULT_EPS_GRID = (2.0, 1.0, 0.5, 0.25, 0.125)
DEFAULT_HORIZONS = (2**8, 2**9, 2**10, 2**11, 2**12)
DEFAULT_K_MIN = 32
ENVELOPE_SLACK = 1e-12


class Verdict(str, Enum):
    COMPACT_CERTIFIED = "COMPACT_CERTIFIED"
    COMPACT_EVIDENCE = "COMPACT_EVIDENCE"
    NOT_COMPACT_EVIDENCE = "NOT_COMPACT_EVIDENCE"
    UNKNOWN = "UNKNOWN"

    @property
    def is_compact(self) -> bool:
        return self in (Verdict.COMPACT_CERTIFIED, Verdict.COMPACT_EVIDENCE)


# -- certificates ------------------------------------------------------------------

@dataclass(frozen=True)
class Envelope:
    """A nonincreasing majorant: tau(k) = head[k] for k < d, tau(k) <= tail_value for k >= d."""

    head: np.ndarray
    tail_value: float
    tends_to_zero: bool
    label: str = ""

    @classmethod
    def monotone_hull(cls, values, tail_value: float, tends_to_zero: bool, label: str = "") -> "Envelope":
        """tau(k) = max(values[k:], tail_value); nonincreasing by construction."""
        v = np.abs(np.asarray(values, dtype=complex)).astype(float)
        hull = np.maximum.accumulate(v[::-1])[::-1]
        hull = np.maximum(hull, tail_value)
        return cls(hull, float(tail_value), tends_to_zero, label)

    @property
    def monotone(self) -> bool:
        return bool(np.all(np.diff(self.head) <= 0.0)) and bool(self.head[-1] >= self.tail_value)

    def __call__(self, k: int) -> float:
        return float(self.head[k]) if k < self.head.size else self.tail_value


@dataclass
class TailCertificate:
    status: str  # "COMPACT_CERTIFIED" or "REJECTED"
    provenance: str
    violation: dict | None = None
    envelope: Envelope | None = None

    @property
    def ok(self) -> bool:
        return self.status == Verdict.COMPACT_CERTIFIED.value

    def to_dict(self) -> dict:
        out = {"status": self.status, "provenance": self.provenance}
        if self.violation is not None:
            out["violation"] = self.violation
        if self.envelope is not None:
            out["envelope_head"] = [float(t) for t in self.envelope.head]
            out["envelope_tail"] = self.envelope.tail_value
        return out


def tail_uniform_certificate(members, envelope: Envelope, horizon: int | None = None,
                             scope: str = "") -> TailCertificate:
    """Check |coordinate k| <= tau(k) on every member's head and tail, plus boundedness.

    ``scope`` states why the checked members stand for the whole family (for
    instance, an isometric diagonal leaves coordinate moduli unchanged).
    """
    members = list(members)[: horizon] if horizon else list(members)
    if not envelope.monotone:
        return TailCertificate("REJECTED", "envelope is not nonincreasing", {"member": None, "coordinate": None})
    if not envelope.tends_to_zero:
        return TailCertificate("REJECTED", "envelope is not known to tend to 0", {"member": None, "coordinate": None})
    sup_hi = 0.0
    for idx, v in enumerate(members):
        d = v.d
        tau = np.array([envelope(k) for k in range(d)])
        excess = np.abs(v.head) - tau * (1.0 + ENVELOPE_SLACK) - ENVELOPE_SLACK
        bad = np.flatnonzero(excess > 0)
        if bad.size:
            k = int(bad[0])
            return TailCertificate("REJECTED", "coordinate exceeds the envelope",
                                   {"member": idx, "coordinate": k, "value": float(abs(v.head[k])),
                                    "tau": float(tau[k])})
        if v.tail.kind is TailKind.LIMIT and v.tail.limit != 0:
            return TailCertificate("REJECTED", "member does not tend to 0",
                                   {"member": idx, "coordinate": "tail", "limit_modulus": abs(v.tail.limit)})
        if v.tail.bound > envelope(d) * (1.0 + ENVELOPE_SLACK) + ENVELOPE_SLACK:
            return TailCertificate("REJECTED", "tail bound exceeds the envelope",
                                   {"member": idx, "coordinate": "tail", "bound": v.tail.bound,
                                    "tau": envelope(d)})
        sup_hi = max(sup_hi, sup_norm_interval(v).hi)
    if not math.isfinite(sup_hi):
        return TailCertificate("REJECTED", "unbounded head family", {"member": None, "coordinate": None})
    text = (f"bounded (sup norm <= {sup_hi!r}) + uniformly small tails under {envelope.label or 'tau'} "
            "=> totally bounded in c0")
    if scope:
        text += f"; {scope}"
    return TailCertificate(Verdict.COMPACT_CERTIFIED.value, text, envelope=envelope)


# -- families ------------------------------------------------------------------------

class PointFamily:
    """Points z_0, ..., z_{size-1}; ``index_set[i]`` is the exponent labelling z_i."""

    name: str = "family"
    size: int = 0
    index_set: list
    certificate: TailCertificate | None = None

    def dist_many(self, i: int, js: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def dist(self, i: int, j: int) -> tuple[float, float]:
        lo, hi = self.dist_many(i, np.array([j]))
        return float(lo[0]), float(hi[0])

    def candidate_distances(self, horizon: int) -> np.ndarray:
        """Observed lo distances used as the delta search grid."""
        n = min(horizon, self.size)
        probes = sorted({0, n // 3, n // 2, n - 1})
        vals = [self.dist_many(p, np.arange(n))[0] for p in probes]
        return np.unique(np.concatenate(vals))


class LagFamily(PointFamily):
    """Translation-invariant family: dist(z_p, z_q) depends only on |p - q|."""

    def __init__(self, lo_table, hi_table, name: str, certificate: TailCertificate | None = None):
        self.lo = np.asarray(lo_table, dtype=float)
        self.hi = np.asarray(hi_table, dtype=float)
        self.lo[0] = 0.0
        self.hi[0] = 0.0
        self.size = self.lo.size
        self.index_set = list(range(self.size))
        self.name = name
        self.certificate = certificate

    def dist_many(self, i, js):
        lag = np.abs(np.asarray(js) - i)
        return self.lo[lag], self.hi[lag]

    def candidate_distances(self, horizon):
        return np.unique(self.lo[: min(horizon, self.size)])


class PointSetFamily(PointFamily):
    """Explicit points in C^n with the Euclidean norm (exact up to rounding)."""

    def __init__(self, points, name: str, certificate: TailCertificate | None = None):
        self.points = np.asarray(points, dtype=complex)
        self.size = self.points.shape[0]
        self.index_set = list(range(self.size))
        self.name = name
        self.certificate = certificate

    def dist_many(self, i, js):
        d = np.linalg.norm(self.points[np.asarray(js)] - self.points[i], axis=1)
        return d, d


class SeqFamily(PointFamily):
    """Explicit SeqVec members with interval distances."""

    def __init__(self, members, name: str, certificate: TailCertificate | None = None):
        members = list(members)
        d = min(v.d for v in members)
        self.members = members
        self.heads = np.array([v.head[:d] for v in members])
        spill = np.array([np.max(np.abs(v.head[d:] - v.tail.center), initial=0.0) for v in members])
        self.bounds = np.maximum(np.array([v.tail.bound for v in members]), spill)
        self.centers = np.array([v.tail.center for v in members])
        self.size = len(members)
        self.index_set = list(range(self.size))
        self.name = name
        self.certificate = certificate

    def dist_many(self, i, js):
        js = np.asarray(js)
        head = np.max(np.abs(self.heads[js] - self.heads[i]), axis=1)
        cdiff = np.abs(self.centers[js] - self.centers[i])
        lo = np.maximum(head, cdiff)
        hi = np.maximum(head, cdiff + self.bounds[js] + self.bounds[i])
        lo[js == i] = 0.0
        hi[js == i] = 0.0
        return lo, hi


# -- family constructors --------------------------------------------------------------

def _isometric_lag_tables(op: DiagonalOperator, y: SeqVec, horizon: int):
    lo = np.empty(horizon)
    hi = np.empty(horizon)
    for h in range(horizon):
        iv = dist_interval(apply_power(op, h, y), y)
        lo[h], hi[h] = iv.lo, iv.hi
    return lo, hi


def _diagonal_envelope_certificate(op: DiagonalOperator, y: SeqVec, members) -> TailCertificate:
    if not y.is_null:
        return TailCertificate("REJECTED", "generator does not tend to 0, so no envelope can tend to 0",
                               {"member": 0, "coordinate": "tail", "limit_modulus": abs(y.tail.center)})
    env = Envelope.monotone_hull(y.head, y.tail.bound, tends_to_zero=True,
                                 label="tau(k) = monotone hull of |y_k|")
    return tail_uniform_certificate(
        members, env,
        scope="|a_k| <= 1 for all k, so |(T^n y)_k| <= |y_k| <= tau(k) for every n, not only the sampled ones",
    )


def sequence_orbit_family(op: DiagonalOperator, y: SeqVec, horizon: int, name: str,
                          tails_vanish: str = "") -> PointFamily:
    """The orbit {T^n y : n < horizon} of a SeqVec under a diagonal operator."""
    if op.unimodular:
        lo, hi = _isometric_lag_tables(op, y, horizon)
        members = [apply_power(op, n, y) for n in range(min(horizon, 64))]
        cert = _diagonal_envelope_certificate(op, y, members)
        if cert.ok and tails_vanish:
            cert.provenance += f"; {tails_vanish}"
        return LagFamily(lo, hi, name, cert)
    pb = power_norm_bound(op)
    members = [apply_power(op, n, y) for n in range(horizon)]
    cert = _diagonal_envelope_certificate(op, y, members) if pb.M <= 1.0 else None
    return SeqFamily(members, name, cert)


def _finite_dim_certificate(op: MatrixOperator, x) -> TailCertificate:
    pb = power_norm_bound(op)
    bound = pb.M * float(np.linalg.norm(x))
    if pb.provenance is BoundProvenance.SPECTRAL:
        return TailCertificate(Verdict.COMPACT_CERTIFIED.value,
                               f"finite-dimensional space, sup_n ||T^n|| <= {pb.M!r} certified "
                               f"=> orbit bounded by {bound!r} => relatively compact")
    return TailCertificate("REJECTED", f"power bound is {pb.provenance.value}, not certified",
                           {"member": None, "coordinate": None})


def example1_samples(op: Example1Operator, m: int | None, shifts, times, d: int = 48):
    """Coordinate vectors (T^p z)(t) as SeqVecs, z = x (m=None) or z = (T^m - I)x.

    Coordinate n of x(t) is sin(t / 2**n); the tail bound beyond d comes from
    |sin u - sin v| <= |u - v| (difference members) or |sin| <= 1 (orbit members).
    """
    n = np.arange(d)
    scale = 2.0 ** n
    out = []
    for p in shifts:
        for t in times:
            s = t + p * op.a
            if m is None:
                out.append(SeqVec(np.sin(s / scale), TailDescriptor.null(1.0)))
            else:
                head = np.sin((s + m * op.a) / scale) - np.sin(s / scale)
                out.append(SeqVec(head, TailDescriptor.null(min(2.0, m * op.a / 2.0**d))))
    return out


def example1_diff_certificate(op: Example1Operator, m: int = 1, d: int = 48) -> TailCertificate:
    """Envelope certificate for D_m of the Example-1 shift.

    By the sum-to-product identity |z(t)_n| <= 2|sin(m a / 2**(n+1))| for every
    t and every translate, so one decreasing envelope controls all members; the
    check below re-verifies it on sampled members.  Each head coordinate is a
    continuous 2*pi*2**n-periodic function, whose translates form a compact set
    in BUC(R), so uniformly small tails give total boundedness.
    """
    head = [example1_diff_envelope(op, n, m) for n in range(d)]
    env = Envelope(np.array(head), min(2.0, m * op.a / 2.0**d), True,
                   label=f"tau(n) = monotone hull of 2|sin({m}a/2^(n+1))|")
    members = example1_samples(op, m, range(0, 64), np.linspace(0.0, 64.0, 17))
    return tail_uniform_certificate(
        members, env,
        scope="the envelope bound holds for all t and all translates in closed form; "
              "head coordinates are periodic, so their translates are compact in BUC(R)",
    )


def orbit_family(op, x=None, horizon: int = DEFAULT_HORIZONS[-1]) -> PointFamily:
    """{T^n x : 0 <= n < horizon}."""
    if isinstance(op, Example1Operator):
        t = example1_distance_table(op, np.arange(horizon), "orbit")
        return LagFamily(t, t, f"example1 orbit (a={op.a!r})")
    if isinstance(op, DiagonalOperator):
        if not isinstance(x, SeqVec):
            raise FamilyConstructionError("diagonal operators need a SeqVec starting vector")
        return sequence_orbit_family(op, x, horizon, "diagonal orbit")
    if isinstance(op, MatrixOperator):
        x = np.asarray(x, dtype=complex)
        pts = orbit(op, x, horizon - 1)
        return PointSetFamily(pts, "matrix orbit", _finite_dim_certificate(op, x))
    raise FamilyConstructionError(f"unsupported operator {type(op).__name__}")


def diff_family(op, x=None, m: int = 1, horizon: int = DEFAULT_HORIZONS[-1]) -> PointFamily:
    """D_m = {T^n (T^m - I) x : 0 <= n < horizon}."""
    if m < 1:
        raise FamilyConstructionError("difference step m must be >= 1")
    if isinstance(op, Example1Operator):
        t = example1_distance_table(op, np.arange(horizon), "diff", step=m)
        return LagFamily(t, t, f"example1 D_{m} (a={op.a!r})", example1_diff_certificate(op, m))
    if isinstance(op, DiagonalOperator):
        if not isinstance(x, SeqVec):
            raise FamilyConstructionError("diagonal operators need a SeqVec starting vector")
        y = combine(1, apply_power(op, m, x), -1, x)
        note = ""
        if op.exact and x.tail.kind is TailKind.LIMIT:
            note = f"tau(k) <= |a_k^{m} - 1| * |x|, a_k^{m} -> b^{m}"
        return sequence_orbit_family(op, y, horizon, f"diagonal D_{m}", note)
    if isinstance(op, MatrixOperator):
        x = np.asarray(x, dtype=complex)
        y = np.linalg.matrix_power(op.entries, m) @ x - x
        pts = orbit(op, y, horizon - 1)
        return PointSetFamily(pts, f"matrix D_{m}", _finite_dim_certificate(op, y))
    raise FamilyConstructionError(f"unsupported operator {type(op).__name__}")


# -- greedy nets and packings ------------------------------------------------------------

@dataclass
class NetScan:
    centers: np.ndarray
    cover: np.ndarray  # cover[i] = hi distance from point i to the center that absorbed it

    def size_at(self, horizon: int) -> int:
        return int(np.searchsorted(self.centers, horizon))

    def radius_at(self, horizon: int) -> float:
        return float(self.cover[:horizon].max(initial=0.0))


def _net_scan(family: PointFamily, eps: float, horizon: int) -> NetScan:
    if not eps > 0:
        raise ValueError("eps must be > 0")
    n = min(horizon, family.size)
    centers = np.empty(n, dtype=np.int64)
    cover = np.zeros(n)
    c = 0
    for i in range(n):
        if c:
            lo, hi = family.dist_many(i, centers[:c])
            if np.all(lo > eps):
                centers[c] = i
                c += 1
            else:
                cover[i] = float(hi.min())
        else:
            centers[0] = i
            c = 1
    return NetScan(centers[:c].copy(), cover)


@dataclass
class NetResult:
    centers: list
    eps: float
    covering_radius: float

    @property
    def covered(self) -> bool:
        return self.covering_radius <= self.eps


def greedy_net(family: PointFamily, eps: float, horizon: int) -> NetResult:
    """Ascending first-fit eps-net; centers are pairwise > eps apart (lo)."""
    scan = _net_scan(family, eps, horizon)
    return NetResult([int(c) for c in scan.centers], eps, scan.radius_at(horizon))


def _packing_scan(family: PointFamily, delta: float, horizon: int, K_target: int | None = None) -> np.ndarray:
    n = min(horizon, family.size)
    kept = np.empty(n, dtype=np.int64)
    c = 0
    for i in range(n):
        if c == 0 or np.all(family.dist_many(i, kept[:c])[0] >= delta):
            kept[c] = i
            c += 1
            if K_target is not None and c >= K_target:
                break
    return kept[:c].copy()


@dataclass
class PackingResult:
    delta: float
    witness_indices: list
    min_pairwise: list  # per witness, min lo distance to the other witnesses
    verified_delta: float

    def to_dict(self) -> dict:
        return {
            "delta": self.verified_delta,
            "requested_delta": self.delta,
            "witness_indices": list(self.witness_indices),
            "count": len(self.witness_indices),
        }


def verify_packing(family: PointFamily, witnesses, delta: float) -> PackingResult:
    """Exhaustive pairwise check with lo distances; raises AssertionError on failure."""
    w = np.asarray(witnesses, dtype=np.int64)
    mins = []
    for a in range(w.size):
        lo = family.dist_many(int(w[a]), w)[0].copy()
        lo[a] = np.inf
        m = float(lo.min()) if w.size > 1 else math.inf
        if m < delta:
            raise AssertionError(f"packing witnesses {w[a]} too close: {m} < {delta}")
        mins.append(m)
    verified = min(mins) if mins and math.isfinite(min(mins)) else float(delta)
    return PackingResult(float(delta), [int(i) for i in w], mins, verified)


def greedy_packing(family: PointFamily, delta: float, horizon: int, K_target: int | None = None) -> PackingResult:
    """Ascending first-fit delta-separated set (lo distances), verified pairwise."""
    if not delta > 0:
        raise ValueError("delta must be > 0")
    return verify_packing(family, _packing_scan(family, delta, horizon, K_target), delta)


# -- entropy tables and verdicts ---------------------------------------------------------------

@dataclass(frozen=True)
class EntropyCell:
    eps: float
    horizon: int
    net_size: int
    covering_radius: float


@dataclass
class EntropyTable:
    cells: list
    flags: dict  # eps -> "STABLE" | "GROWING"

    def size(self, eps: float, horizon: int) -> int:
        for c in self.cells:
            if c.eps == eps and c.horizon == horizon:
                return c.net_size
        raise KeyError((eps, horizon))

    def csv_rows(self) -> list:
        return [(c.eps, c.horizon, c.net_size, self.flags[c.eps]) for c in self.cells]


def entropy_table(family: PointFamily, eps_grid=DEFAULT_EPS_GRID, horizons=DEFAULT_HORIZONS) -> EntropyTable:
    eps_grid = [float(e) for e in eps_grid]
    horizons = [int(h) for h in horizons]
    if any(a <= b for a, b in zip(eps_grid, eps_grid[1:])) or min(eps_grid) <= 0:
        raise ValueError("eps_grid must be positive and strictly descending")
    if any(a >= b for a, b in zip(horizons, horizons[1:])) or horizons[0] < 1:
        raise ValueError("horizons must be positive and strictly ascending")
    if horizons[-1] > family.size:
        raise ValueError(f"family has {family.size} points, horizon {horizons[-1]} requested")
    scans = pmap(lambda e: _net_scan(family, e, horizons[-1]), eps_grid)
    cells, flags = [], {}
    top = horizons[len(horizons) // 2:]
    for eps, scan in zip(eps_grid, scans):
        for h in horizons:
            cells.append(EntropyCell(eps, h, scan.size_at(h), scan.radius_at(h)))
        flags[eps] = "STABLE" if len({scan.size_at(h) for h in top}) == 1 else "GROWING"
    return EntropyTable(cells, flags)


@dataclass
class AnalysisConfig:
    eps_grid: tuple = DEFAULT_EPS_GRID
    horizons: tuple = DEFAULT_HORIZONS
    K_min: int = DEFAULT_K_MIN
    delta_search: bool = True


@dataclass
class CompactnessVerdict:
    verdict: Verdict
    family: str
    entropy: EntropyTable
    packing: PackingResult | None = None
    certificate: str = ""
    diameter_lower: float = 0.0
    tail_certificate: TailCertificate | None = None
    notes: list = field(default_factory=list)

    @property
    def entropy_table(self) -> list:
        return [(c.eps, c.horizon, c.net_size) for c in self.entropy.cells]

    def to_dict(self) -> dict:
        out = {
            "verdict": self.verdict.value,
            "family": self.family,
            "certificate": self.certificate,
            "diameter_lower": self.diameter_lower,
            "entropy_table": [
                {"eps": c.eps, "horizon": c.horizon, "net_size": c.net_size,
                 "covering_radius": c.covering_radius, "flag": self.entropy.flags[c.eps]}
                for c in self.entropy.cells
            ],
            "flags": {format(e, ".17g"): f for e, f in self.entropy.flags.items()},
            "packing": self.packing.to_dict() if self.packing else None,
            "notes": list(self.notes),
        }
        if self.tail_certificate is not None:
            out["tail_certificate"] = self.tail_certificate.to_dict()
        return out

    def packing_csv_rows(self) -> list:
        if self.packing is None:
            return []
        return [(k, idx, m) for k, (idx, m) in
                enumerate(zip(self.packing.witness_indices, self.packing.min_pairwise))]


def _separation_search(family: PointFamily, cfg: AnalysisConfig, floor: float):
    """Largest observed distance delta >= floor whose greedy packing at the top
    horizon has >= K_min points and still grows over the top half of horizons."""
    H = cfg.horizons[-1]
    checkpoints = list(cfg.horizons[len(cfg.horizons) // 2:])
    cands = family.candidate_distances(H)
    cands = cands[(cands >= floor) & (cands > 0)]
    if cands.size == 0:
        return None

    def ok(delta):
        kept = _packing_scan(family, float(delta), H)
        counts = [int(np.searchsorted(kept, h)) for h in checkpoints]
        growing = all(a < b for a, b in zip(counts, counts[1:]))
        return (kept.size >= cfg.K_min and growing), kept

    good, kept = ok(cands[0])
    if not good:
        return None
    lo_i, hi_i, best = 0, cands.size - 1, (cands[0], kept)
    while lo_i < hi_i:
        mid = (lo_i + hi_i + 1) // 2
        g, k = ok(cands[mid])
        if g:
            lo_i, best = mid, (cands[mid], k)
        else:
            hi_i = mid - 1
    return best


def verdict(family: PointFamily, cfg: AnalysisConfig = AnalysisConfig()) -> CompactnessVerdict:
    table = entropy_table(family, cfg.eps_grid, cfg.horizons)
    H = cfg.horizons[-1]
    diameter = float(family.candidate_distances(H).max(initial=0.0))
    notes = []
    cert = family.certificate
    if cert is not None and cert.ok:
        return CompactnessVerdict(Verdict.COMPACT_CERTIFIED, family.name, table, None,
                                  cert.provenance, diameter, cert, notes)
    if cert is not None:
        notes.append(f"tail certificate rejected: {cert.provenance}")
    growing = [e for e, f in table.flags.items() if f == "GROWING"]
    if not growing:
        return CompactnessVerdict(Verdict.COMPACT_EVIDENCE, family.name, table, None,
                                  "every eps-net stabilised over the top half of the horizons",
                                  diameter, cert, notes)
    if cfg.delta_search:
        found = _separation_search(family, cfg, max(growing))
        if found is not None:
            delta, kept = found
            packing = verify_packing(family, kept, float(delta))
            return CompactnessVerdict(
                Verdict.NOT_COMPACT_EVIDENCE, family.name, table, packing,
                f"{len(kept)} points pairwise >= {packing.verified_delta!r} apart (lo), "
                f"packing still growing at horizon {H}",
                diameter, cert, notes)
    return CompactnessVerdict(Verdict.UNKNOWN, family.name, table, None,
                              "nets still growing but no growing separated set found", diameter, cert, notes)
