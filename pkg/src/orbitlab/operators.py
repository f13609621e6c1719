"""Concrete operator families and exact power application.

Three kinds of operator are supported:

* :class:`DiagonalOperator` on c / c0, ``(x_k) -> (a_k x_k)``.  The dyadic
  rule keeps every phase as an exact rational number of turns, so
  ``a_k ** n`` is evaluated from an integer residue and never accumulates
  rounding, even for exponents around ``2**62``.
* :class:`MatrixOperator`, a dense complex matrix acting on ``C^d``.
* :class:`Example1Operator`, the shift by ``a`` on bounded uniformly
  continuous ``c0``-valued functions, restricted to the orbit of
  ``x(t) = (sin(t / 2**n))_n``.  Only pairwise distances are exposed, in
  closed form, plus a brute-force sampling oracle for checking them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

import numpy as np

from .errors import DimensionMismatch, HorizonExceeded, NotPowerBounded, UnsupportedOperator
from .seqspace import SeqVec, TailDescriptor, TailKind, truncate

DEFAULT_MAX_HORIZON = 2**20
HALF_PI = 0.5 * math.pi


def unit_root(r: int, denom: int) -> complex:
    """exp(2*pi*i*r/denom), exact at multiples of a quarter turn."""
    r %= denom
    if r == 0:
        return 1 + 0j
    if 2 * r == denom:
        return -1 + 0j
    if 4 * r == denom:
        return 1j
    if 4 * r == 3 * denom:
        return -1j
    if 2 * r > denom:
        r -= denom
    angle = 2.0 * math.pi * (r / denom)
    return complex(math.cos(angle), math.sin(angle))


def unit_roots(r: np.ndarray, denom: np.ndarray) -> np.ndarray:
    """Vectorised :func:`unit_root` for int64 residues with 0 <= r < denom < 2**52."""
    r = np.where(2 * r > denom, r - denom, r)
    out = np.exp(2j * np.pi * (r / denom))
    quarter = (4 * r) % denom == 0
    if np.any(quarter):
        turns = np.broadcast_to((4 * r) // np.where(quarter, denom, 1), out.shape) % 4
        exact = np.array([1, 1j, -1, -1j])[turns]
        out = np.where(quarter, exact, out)
    return out


def turn_distance(r: int, denom: int) -> float:
    """Distance of r/denom to the nearest integer, as a float in [0, 1/2]."""
    r %= denom
    return min(r, denom - r) / denom


# -- diagonal rules -----------------------------------------------------------

@dataclass(frozen=True)
class DyadicPhase:
    """a_k = exp(2*pi*i*(base + flip/2 + num / 2**(k+1))), limit exp(2*pi*i*(base + flip/2)).

    ``base`` is an exact fraction of a turn; ``base = 1/m`` gives a limit that
    is a primitive m-th root of unity.
    """

    num: int = 1
    sign_flip: bool = False
    base: Fraction = Fraction(0)

    def __post_init__(self):
        if self.num == 0:
            raise ValueError("num must be nonzero (otherwise a_k equals its limit)")
        object.__setattr__(self, "base", Fraction(self.base) % 1)

    @property
    def limit_turns(self) -> Fraction:
        return (self.base + (Fraction(1, 2) if self.sign_flip else 0)) % 1

    def residue(self, k: int, n: int) -> tuple[int, int]:
        """(r, D) with a_k**n = exp(2*pi*i*r/D), exact."""
        lim = self.limit_turns
        p, q = lim.numerator, lim.denominator
        denom = q << (k + 1)
        numer = n * ((p << (k + 1)) + self.num * q)
        return numer % denom, denom

    def limit_residue(self, n: int) -> tuple[int, int]:
        lim = self.limit_turns
        return (n * lim.numerator) % lim.denominator, lim.denominator

    def drift_sup(self, n: int, d: int) -> float:
        """sup_{k >= d} |a_k**n - b**n|, in closed form.

        Writing a_k = b * w_k with w_k = exp(2*pi*i*num/2**(k+1)), the quantity
        is sup_k 2*sin(pi * ||n*num / 2**(k+1)||).  Once n*num/2**(k+1) <= 1/2
        the terms decrease in k, so a finite scan is exact.
        """
        m = abs(n * self.num)
        if m == 0:
            return 0.0
        best = 0.0
        k = d
        while True:
            denom = 1 << (k + 1)
            best = max(best, 2.0 * math.sin(math.pi * turn_distance(m, denom)))
            if m <= (1 << k):
                return best
            k += 1

    def inverse(self) -> "DyadicPhase":
        return DyadicPhase(-self.num, self.sign_flip, -self.base)


@dataclass(frozen=True)
class ExplicitRule:
    """Finitely many listed entries plus a limit and a user-supplied tail drift.

    ``tail_sup`` must bound sup_{k >= len(entries)} |a_k - limit|.
    """

    entries: tuple
    limit: complex
    tail_sup: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(complex(z) for z in self.entries))
        object.__setattr__(self, "limit", complex(self.limit))
        if not self.entries:
            raise ValueError("explicit rule needs at least one entry")
        if self.tail_sup < 0:
            raise ValueError("tail_sup must be >= 0")

    @property
    def unimodular(self) -> bool:
        return (
            all(abs(abs(z) - 1.0) <= 1e-12 for z in self.entries)
            and abs(abs(self.limit) - 1.0) <= 1e-12
        )


@dataclass(frozen=True)
class DiagonalOperator:
    rule: DyadicPhase | ExplicitRule

    @classmethod
    def dyadic(cls, num=1, sign_flip=False, base=Fraction(0)):
        return cls(DyadicPhase(num, sign_flip, Fraction(base)))

    @classmethod
    def mth_root(cls, m: int, num: int = 1):
        """a_k = b * exp(2*pi*i*num/2**(k+1)) with b = exp(2*pi*i/m)."""
        return cls(DyadicPhase(num, False, Fraction(1, m)))

    @property
    def exact(self) -> bool:
        return isinstance(self.rule, DyadicPhase)

    @property
    def head_limit(self) -> int | None:
        """Largest head length this operator can act on (None = unbounded)."""
        return None if self.exact else len(self.rule.entries)

    @property
    def limit(self) -> complex:
        if self.exact:
            r, q = self.rule.limit_residue(1)
            return unit_root(r, q)
        return self.rule.limit

    @property
    def unimodular(self) -> bool:
        return self.exact or self.rule.unimodular

    def entry(self, k: int) -> complex:
        return self.entry_power(k, 1)

    def entry_power(self, k: int, n: int) -> complex:
        if self.exact:
            return unit_root(*self.rule.residue(k, n))
        return complex(self.rule.entries[k]) ** n

    def powers(self, n: int, d: int) -> np.ndarray:
        if self.exact:
            return np.array([unit_root(*self.rule.residue(k, n)) for k in range(d)], dtype=complex)
        return np.asarray(self.rule.entries[:d], dtype=complex) ** n

    def powers_many(self, ns, d: int) -> np.ndarray:
        """Rows a_k**n for each n in ns (k < d); exact residues, vectorised when they fit in int64."""
        ns = [int(n) for n in ns]
        if not self.exact:
            return np.asarray(self.rule.entries[:d], dtype=complex)[None, :] ** np.asarray(ns)[:, None]
        lim = self.rule.limit_turns
        p, q = lim.numerator, lim.denominator
        coef = [(p << (k + 1)) + self.rule.num * q for k in range(d)]
        denom = [q << (k + 1) for k in range(d)]
        big = max(abs(c) for c in coef) * max([abs(n) for n in ns] + [1])
        if big >= 1 << 62 or denom[-1] >= 1 << 52:
            return np.array([self.powers(n, d) for n in ns], dtype=complex).reshape(len(ns), d)
        D = np.array(denom, dtype=np.int64)[None, :]
        r = (np.array(ns, dtype=np.int64)[:, None] * np.array(coef, dtype=np.int64)[None, :]) % D
        return unit_roots(r, D)

    def limit_power(self, n: int) -> complex:
        if self.exact:
            return unit_root(*self.rule.limit_residue(n))
        return self.rule.limit**n

    def drift_sup(self, n: int, d: int) -> float:
        """Certified sup_{k >= d} |a_k**n - b**n|."""
        if n == 0:
            return 0.0
        if self.exact:
            return self.rule.drift_sup(n, d)
        if d < len(self.rule.entries):
            listed = np.asarray(self.rule.entries[d:], dtype=complex)
            head_part = float(np.max(np.abs(listed**n - self.rule.limit**n)))
        else:
            head_part = 0.0
        b, s = abs(self.rule.limit), self.rule.tail_sup
        beyond = (b + s) ** n - b**n
        if self.rule.unimodular:
            beyond = min(beyond, 2.0)
        return max(head_part, beyond)

    def modulus_sup(self, n: int, d: int) -> float:
        """Certified sup_{k >= d} |a_k**n|."""
        if self.unimodular:
            return 1.0
        listed = np.asarray(self.rule.entries[d:], dtype=complex)
        head_part = float(np.max(np.abs(listed) ** n)) if listed.size else 0.0
        return max(head_part, (abs(self.rule.limit) + self.rule.tail_sup) ** n)

    def inverse(self) -> "DiagonalOperator":
        if not self.exact:
            rule = self.rule
            inv = tuple(1 / z for z in rule.entries)
            if not rule.unimodular:
                raise UnsupportedOperator("inverse of a non-unimodular explicit diagonal")
            return DiagonalOperator(ExplicitRule(inv, 1 / rule.limit, rule.tail_sup))
        return DiagonalOperator(self.rule.inverse())

    def fixed_coordinates(self, d: int) -> list[int]:
        """Head coordinates with a_k == 1 (the kernel of T - I on the head)."""
        if self.exact:
            return [k for k in range(d) if self.rule.residue(k, 1)[0] == 0]
        return [k for k, z in enumerate(self.rule.entries[:d]) if z == 1]

    def matrix_embedding(self, d: int) -> "MatrixOperator":
        return MatrixOperator(np.diag(self.powers(1, d)))

    def describe(self) -> dict:
        if self.exact:
            r = self.rule
            return {
                "kind": "diagonal",
                "rule": "dyadic",
                "num": r.num,
                "sign_flip": r.sign_flip,
                "base_turns": f"{r.base.numerator}/{r.base.denominator}",
            }
        return {"kind": "diagonal", "rule": "explicit", "size": len(self.rule.entries)}


@dataclass(frozen=True, eq=False)
class MatrixOperator:
    entries: np.ndarray

    def __post_init__(self):
        a = np.array(self.entries, dtype=complex)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError("matrix operator must be square")
        if not 1 <= a.shape[0] <= 64:
            raise ValueError("matrix dimension must be in 1..64")
        if not np.all(np.isfinite(a)):
            raise ValueError("matrix entries must be finite")
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def describe(self) -> dict:
        return {"kind": "matrix", "dim": self.dim}


@dataclass(frozen=True)
class Example1Operator:
    a: float = 1.0

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError("shift step a must be > 0")

    def describe(self) -> dict:
        return {"kind": "example1", "a": self.a}


Operator = DiagonalOperator | MatrixOperator | Example1Operator


# -- application ----------------------------------------------------------------

def _diagonal_power(op: DiagonalOperator, n: int, v: SeqVec) -> SeqVec:
    cap = op.head_limit
    if cap is not None and v.d > cap:
        v = truncate(v, cap)
    head = op.powers(n, v.d) * v.head
    L = v.tail.center
    bound = op.modulus_sup(n, v.d) * v.tail.bound + op.drift_sup(n, v.d) * abs(L)
    tail = TailDescriptor(v.tail.kind, bound, op.limit_power(n) * L)
    return SeqVec(head, tail)


def apply_power(op: Operator, n: int, v, max_horizon: int = DEFAULT_MAX_HORIZON):
    """T**n v. Exact-phase for dyadic diagonals at any n; others capped at max_horizon."""
    n = int(n)
    if n < 0:
        raise ValueError("power must be nonnegative; use op.inverse() for negative powers")
    if isinstance(op, DiagonalOperator):
        if not isinstance(v, SeqVec):
            raise TypeError("diagonal operators act on SeqVec")
        if not op.exact and n > max_horizon:
            raise HorizonExceeded(f"n={n} exceeds horizon {max_horizon}", n=n, horizon=max_horizon)
        return _diagonal_power(op, n, v)
    if isinstance(op, MatrixOperator):
        v = np.asarray(v, dtype=complex)
        if v.shape[0] != op.dim:
            raise DimensionMismatch(f"vector has length {v.shape[0]}, operator dim {op.dim}")
        if n > max_horizon:
            raise HorizonExceeded(f"n={n} exceeds horizon {max_horizon}", n=n, horizon=max_horizon)
        return np.linalg.matrix_power(op.entries, n) @ v
    raise UnsupportedOperator("the Example-1 shift is only available through its orbit metrics")


def apply(op: Operator, v):
    return apply_power(op, 1, v)


def orbit(op: MatrixOperator, x, n_max: int) -> np.ndarray:
    """Rows T**0 x, ..., T**n_max x by repeated multiplication."""
    x = np.asarray(x, dtype=complex)
    out = np.empty((n_max + 1, x.size), dtype=complex)
    out[0] = x
    for n in range(n_max):
        out[n + 1] = op.entries @ out[n]
    return out


# -- power bounds -------------------------------------------------------------

class BoundProvenance(str, Enum):
    EXACT = "ExactUnimodular"
    SPECTRAL = "SpectralCertificate"
    PROBE = "ProbeOnly"


@dataclass(frozen=True)
class PowerBound:
    M: float
    provenance: BoundProvenance
    probe_max: float = 1.0
    notes: str = ""

    def __post_init__(self):
        if self.M < 1.0:
            raise ValueError("a power bound is at least ||T^0|| = 1")

    def to_dict(self) -> dict:
        return {"M": self.M, "provenance": self.provenance.value, "probe_max": self.probe_max}


def probe_power_norms(op: MatrixOperator, n_max: int = 512) -> np.ndarray:
    """||T**n||_2 for n = 0..n_max, by repeated multiplication."""
    norms = np.empty(n_max + 1)
    p = np.eye(op.dim, dtype=complex)
    for n in range(n_max + 1):
        norms[n] = np.linalg.norm(p, 2)
        p = op.entries @ p
    return norms


def power_norm_bound(op: Operator, tol: float = 1e-9) -> PowerBound:
    if isinstance(op, DiagonalOperator):
        if op.unimodular:
            return PowerBound(1.0, BoundProvenance.EXACT, notes="unimodular diagonal")
        m = max(float(np.max(np.abs(op.rule.entries))), abs(op.rule.limit) + op.rule.tail_sup)
        if m > 1.0 + tol:
            raise NotPowerBounded("diagonal entry of modulus > 1", sup_modulus=m)
        return PowerBound(1.0, BoundProvenance.EXACT, notes="contractive diagonal")
    if isinstance(op, Example1Operator):
        return PowerBound(1.0, BoundProvenance.EXACT, notes="translation is an isometry of BUC")
    from .jdlg import matrix_power_bound

    return matrix_power_bound(op, tol)


# -- Example 1: closed-form orbit metrics -------------------------------------------

def _scan_depth(largest_arg: float) -> int:
    """First n with largest_arg / 2**(n+1) <= pi/2; all later terms decrease."""
    n = 0
    while largest_arg / 2 ** (n + 1) > HALF_PI:
        n += 1
    return n


def example1_orbit_distance(op: Example1Operator, p: int, q: int) -> float:
    """||T^p x - T^q x|| = sup_n 2|sin((p-q) a / 2**(n+1))|."""
    h = abs(p - q) * op.a
    if h == 0:
        return 0.0
    return max(2.0 * abs(math.sin(h / 2 ** (n + 1))) for n in range(_scan_depth(h) + 1))


def example1_diff_orbit_distance(op: Example1Operator, p: int, q: int, step: int = 1) -> float:
    """||T^p y - T^q y|| for y = (T^step - I) x.

    Coordinate n of T^p y is 2 sin(step*a/2**(n+1)) cos((2t + (2p+step) a)/2**(n+1));
    the sup over t of a difference of two such cosines with the same amplitude
    gives 4|sin(step*a/2**(n+1))| |sin((p-q) a/2**(n+1))|.
    """
    h = abs(p - q) * op.a
    if h == 0:
        return 0.0
    s = step * op.a
    depth = _scan_depth(max(h, s))
    return max(
        4.0 * abs(math.sin(s / 2 ** (n + 1))) * abs(math.sin(h / 2 ** (n + 1)))
        for n in range(depth + 1)
    )


def example1_distance_table(op: Example1Operator, lags, which: str = "orbit", step: int = 1) -> np.ndarray:
    """Vectorised closed form over lags |p - q|."""
    lags = np.abs(np.asarray(lags, dtype=float))
    h = lags * op.a
    s = step * op.a
    top = float(h.max()) if h.size else 0.0
    depth = _scan_depth(max(top, s if which == "diff" else 0.0))
    scales = 2.0 ** -(np.arange(depth + 1) + 1)
    sines = np.abs(np.sin(np.outer(h, scales)))
    if which == "orbit":
        return 2.0 * sines.max(axis=1)
    if which == "diff":
        return (4.0 * np.abs(np.sin(s * scales)) * sines).max(axis=1)
    raise ValueError(f"unknown family {which!r}")


def example1_diff_envelope(op: Example1Operator, n: int, step: int = 1) -> float:
    """Decreasing majorant of sup_t |(T^p y)(t)_n| over all p (monotone hull of 2|sin(step*a/2**(j+1))|, j >= n)."""
    s = step * op.a
    depth = max(_scan_depth(s), n)
    return max(2.0 * abs(math.sin(s / 2 ** (j + 1))) for j in range(n, depth + 1))


@dataclass(frozen=True)
class GridSpec:
    """Sampling grid for the brute-force oracle.

    Without an explicit t-range each coordinate n is sampled over one full
    period [0, 2*pi*2**n) of its t-dependence.
    """

    steps: int = 2048
    n_max: int = 24
    t_lo: float | None = None
    t_hi: float | None = None

    def __post_init__(self):
        if self.steps < 1000:
            raise ValueError("grid oracle needs at least 1000 steps")
        if self.n_max < 24:
            raise ValueError("grid oracle needs n_max >= 24")


def example1_grid_oracle(op: Example1Operator, p: int, q: int, which: str = "orbit",
                         grid: GridSpec = GridSpec(), step: int = 1) -> float:
    """Sampled sup over t and n <= n_max of the coordinate differences, evaluated
    directly from the sine definitions. Always a lower bound for the closed form."""
    if p == q:
        return 0.0
    a = op.a
    best = 0.0
    for n in range(grid.n_max + 1):
        scale_n = 2.0**n
        if grid.t_lo is None:
            t = np.linspace(0.0, 2.0 * math.pi * scale_n, grid.steps, endpoint=False)
        else:
            t = np.linspace(grid.t_lo, grid.t_hi, grid.steps)
        if which == "orbit":
            vals = np.sin((t + p * a) / scale_n) - np.sin((t + q * a) / scale_n)
        elif which == "diff":
            def y(s):
                return np.sin((s + step * a) / scale_n) - np.sin(s / scale_n)

            vals = y(t + p * a) - y(t + q * a)
        else:
            raise ValueError(f"unknown family {which!r}")
        best = max(best, float(np.max(np.abs(vals))))
    return best
