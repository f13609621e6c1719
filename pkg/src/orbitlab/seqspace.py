"""Sup-norm vectors in c0 and c with certified truncation error.

A :class:`SeqVec` stores the first ``d`` coordinates exactly and describes
everything beyond them by a :class:`TailDescriptor`.  It stands for the *set*
of sequences that agree with the head and obey the tail bound, so norms and
distances come back as intervals that enclose the value for every member.

Coordinates are 0-indexed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

DEFAULT_HEAD = 48


class TailKind(str, Enum):
    NULL = "NullEnvelope"
    LIMIT = "ConvergentLimit"


@dataclass(frozen=True)
class TailDescriptor:
    kind: TailKind
    bound: float = 0.0
    limit: complex = 0j

    def __post_init__(self):
        if not (self.bound >= 0.0 and math.isfinite(self.bound)):
            raise ValueError(f"tail bound must be finite and >= 0, got {self.bound}")
        lim = complex(self.limit)
        if not (math.isfinite(lim.real) and math.isfinite(lim.imag)):
            raise ValueError("tail limit must be finite")
        if self.kind is TailKind.NULL and lim != 0:
            raise ValueError("NullEnvelope tail has no limit")
        object.__setattr__(self, "limit", lim)

    @property
    def center(self) -> complex:
        return self.limit if self.kind is TailKind.LIMIT else 0j

    @classmethod
    def null(cls, bound=0.0):
        return cls(TailKind.NULL, float(bound))

    @classmethod
    def converging(cls, limit, bound=0.0):
        return cls(TailKind.LIMIT, float(bound), complex(limit))


@dataclass(frozen=True)
class NormInterval:
    lo: float
    hi: float

    def __post_init__(self):
        if not (0.0 <= self.lo <= self.hi):
            raise ValueError(f"invalid norm interval [{self.lo}, {self.hi}]")

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def contains(self, value: float, slack: float = 0.0) -> bool:
        return self.lo - slack <= value <= self.hi + slack


@dataclass(frozen=True, eq=False)
class SeqVec:
    head: np.ndarray
    tail: TailDescriptor

    def __post_init__(self):
        head = np.array(self.head, dtype=complex).reshape(-1)
        if head.size < 1:
            raise ValueError("head must contain at least one coordinate")
        if not np.all(np.isfinite(head)):
            raise ValueError("head entries must be finite")
        head.setflags(write=False)
        object.__setattr__(self, "head", head)

    @property
    def d(self) -> int:
        return self.head.size

    @property
    def is_null(self) -> bool:
        """True when every represented sequence lies in c0."""
        return self.tail.kind is TailKind.NULL or self.tail.limit == 0

    def coordinate(self, k: int) -> complex:
        if k < self.d:
            return complex(self.head[k])
        return self.tail.center

    def same_as(self, other: "SeqVec") -> bool:
        return (
            self.d == other.d
            and bool(np.array_equal(self.head, other.head))
            and self.tail == other.tail
        )

    def __repr__(self):
        return f"SeqVec(d={self.d}, tail={self.tail})"


# -- constructors -----------------------------------------------------------

def zeros(d: int = DEFAULT_HEAD) -> SeqVec:
    return SeqVec(np.zeros(d, dtype=complex), TailDescriptor.null())


def ones(d: int = DEFAULT_HEAD) -> SeqVec:
    """The constant sequence 1 (in c, not in c0)."""
    return SeqVec(np.ones(d, dtype=complex), TailDescriptor.converging(1.0))


def basis(index: int, d: int = DEFAULT_HEAD) -> SeqVec:
    if index < 0:
        raise ValueError("basis index must be >= 0")
    head = np.zeros(max(d, index + 1), dtype=complex)
    head[index] = 1.0
    return SeqVec(head, TailDescriptor.null())


def from_finite(values, d: int | None = None) -> SeqVec:
    """Exact encoding of a finitely supported sequence."""
    values = np.asarray(values, dtype=complex).reshape(-1)
    d = max(d or 0, values.size, 1)
    head = np.zeros(d, dtype=complex)
    head[: values.size] = values
    return SeqVec(head, TailDescriptor.null())


# -- operations ---------------------------------------------------------------

def sup_norm_interval(v: SeqVec) -> NormInterval:
    head_max = float(np.max(np.abs(v.head)))
    t = v.tail
    if t.kind is TailKind.LIMIT:
        # x_k -> L forces sup_{k>=d} |x_k| >= |L|, whatever the bound.
        tail_lo = abs(t.limit)
        tail_hi = abs(t.limit) + t.bound
    else:
        tail_lo = 0.0
        tail_hi = t.bound
    return NormInterval(max(head_max, tail_lo), max(head_max, tail_hi))


def truncate(v: SeqVec, d_new: int) -> SeqVec:
    if d_new < 1 or d_new > v.d:
        raise ValueError(f"cannot truncate head of length {v.d} to {d_new}")
    if d_new == v.d:
        return v
    dropped = v.head[d_new:]
    spill = float(np.max(np.abs(dropped - v.tail.center)))
    tail = TailDescriptor(v.tail.kind, max(v.tail.bound, spill), v.tail.limit)
    return SeqVec(v.head[:d_new].copy(), tail)


def pad(v: SeqVec, d_new: int) -> SeqVec:
    """Extend the head; exact only when the tail bound is zero."""
    if d_new <= v.d:
        return v
    if v.tail.bound != 0.0:
        raise ValueError("padding a vector with a nonzero tail bound is not sound")
    head = np.full(d_new, v.tail.center, dtype=complex)
    head[: v.d] = v.head
    return SeqVec(head, v.tail)


def align(v: SeqVec, w: SeqVec) -> tuple[SeqVec, SeqVec]:
    """Bring two vectors to a common head length without losing soundness.

    The shorter head is padded when its tail is exact (bound 0); otherwise the
    longer one is truncated, folding the dropped coordinates into its tail.
    """
    if v.d == w.d:
        return v, w
    short, long_, swapped = (v, w, False) if v.d < w.d else (w, v, True)
    if short.tail.bound == 0.0:
        short = pad(short, long_.d)
    else:
        long_ = truncate(long_, short.d)
    return (long_, short) if swapped else (short, long_)


def combine(alpha, v: SeqVec, beta, w: SeqVec) -> SeqVec:
    """alpha*v + beta*w with interval tails (tails never cancel)."""
    alpha, beta = complex(alpha), complex(beta)
    v, w = align(v, w)
    head = alpha * v.head + beta * w.head
    bound = abs(alpha) * v.tail.bound + abs(beta) * w.tail.bound
    if TailKind.LIMIT in (v.tail.kind, w.tail.kind):
        tail = TailDescriptor.converging(alpha * v.tail.center + beta * w.tail.center, bound)
    else:
        tail = TailDescriptor.null(bound)
    return SeqVec(head, tail)


def scale(alpha, v: SeqVec) -> SeqVec:
    alpha = complex(alpha)
    return SeqVec(alpha * v.head, TailDescriptor(v.tail.kind, abs(alpha) * v.tail.bound, alpha * v.tail.limit))


def dist_interval(v: SeqVec, w: SeqVec) -> NormInterval:
    return sup_norm_interval(combine(1, v, -1, w))


def linear_sum(coeffs, vectors) -> SeqVec:
    """Sum of ``c_i * v_i`` over a nonempty list, all sharing one head length."""
    vectors = list(vectors)
    coeffs = [complex(c) for c in coeffs]
    d = min(v.d for v in vectors)
    vectors = [truncate(v, d) for v in vectors]
    head = np.zeros(d, dtype=complex)
    bound = 0.0
    center = 0j
    convergent = False
    for c, v in zip(coeffs, vectors):
        head += c * v.head
        bound += abs(c) * v.tail.bound
        center += c * v.tail.center
        convergent |= v.tail.kind is TailKind.LIMIT
    tail = TailDescriptor.converging(center, bound) if convergent else TailDescriptor.null(bound)
    return SeqVec(head, tail)


def contains(v: SeqVec, seq, slack: float = 0.0) -> bool:
    """Does the explicit sequence ``seq`` (assumed to continue with the tail
    center beyond its stored length) belong to the set represented by v?"""
    seq = np.asarray(seq, dtype=complex).reshape(-1)
    n = max(seq.size, v.d)
    full = np.full(n, v.tail.center, dtype=complex)
    full[: seq.size] = seq
    if not np.allclose(full[: v.d], v.head, rtol=0, atol=slack):
        return False
    beyond = full[v.d:]
    if beyond.size == 0:
        return True
    return bool(np.max(np.abs(beyond - v.tail.center)) <= v.tail.bound + slack)


def to_json(v: SeqVec) -> dict:
    return {
        "head": [[float(z.real), float(z.imag)] for z in v.head],
        "tail": {
            "kind": "limit" if v.tail.kind is TailKind.LIMIT else "null",
            "limit": [float(v.tail.limit.real), float(v.tail.limit.imag)],
            "bound": float(v.tail.bound),
        },
    }
