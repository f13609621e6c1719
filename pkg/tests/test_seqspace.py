import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from orbitlab import seqspace as ss

finite = st.floats(-5, 5, allow_nan=False, allow_infinity=False)
cplx = st.builds(complex, finite, finite)


@st.composite
def vec_and_member(draw):
    """A SeqVec together with an explicit sequence (head + 32 extra coordinates) it contains."""
    d = draw(st.integers(1, 12))
    head = draw(st.lists(cplx, min_size=d, max_size=d))
    bound = draw(st.floats(0, 2))
    limit = draw(cplx) if draw(st.booleans()) else None
    tail = ss.TailDescriptor.null(bound) if limit is None else ss.TailDescriptor.converging(limit, bound)
    v = ss.SeqVec(np.array(head), tail)
    extra = []
    for _ in range(32):
        r = draw(st.floats(0, 1)) * bound
        phi = draw(st.floats(0, 2 * math.pi))
        extra.append(tail.center + r * complex(math.cos(phi), math.sin(phi)))
    return v, np.array(head + extra)


def explicit_norm(seq, center):
    # The member continues with its tail center forever, which also counts.
    return max(float(np.max(np.abs(seq))), abs(center))


@settings(max_examples=200, deadline=None)
@given(vec_and_member())
def test_norm_interval_encloses_members(pair):
    v, seq = pair
    iv = ss.sup_norm_interval(v)
    assert ss.contains(v, seq, 1e-12)
    assert iv.lo - 1e-12 <= explicit_norm(seq, v.tail.center) <= iv.hi + 1e-12


@settings(max_examples=200, deadline=None)
@given(vec_and_member(), vec_and_member(), cplx, cplx)
def test_combine_is_sound(p1, p2, a, b):
    (v, s), (w, t) = p1, p2
    n = max(s.size, t.size)

    def extend(seq, center):
        out = np.full(n + v.d + w.d, center, dtype=complex)
        out[: seq.size] = seq
        return out

    # Members of v and w only agree with the representation up to their own head+extra length,
    # so keep both explicit sequences aligned by index.
    if v.d != w.d:
        return
    s2, t2 = extend(s, v.tail.center), extend(t, w.tail.center)
    u = ss.combine(a, v, b, w)
    assert ss.contains(u, a * s2 + b * t2, 1e-9)


@settings(max_examples=100, deadline=None)
@given(vec_and_member(), st.integers(1, 12))
def test_truncate_keeps_membership(pair, d_new):
    v, seq = pair
    d_new = min(d_new, v.d)
    assert ss.contains(ss.truncate(v, d_new), seq, 1e-12)


def test_pad_requires_exact_tail():
    v = ss.SeqVec(np.ones(3), ss.TailDescriptor.null(0.5))
    with pytest.raises(ValueError):
        ss.pad(v, 5)
    w = ss.pad(ss.ones(3), 6)
    assert w.d == 6 and np.all(w.head == 1)


def test_limit_tail_lower_bound_uses_limit():
    v = ss.SeqVec(np.zeros(4), ss.TailDescriptor.converging(1.0, 0.25))
    iv = ss.sup_norm_interval(v)
    assert iv.lo == 1.0 and iv.hi == 1.25


def test_basis_and_distance():
    e0, e1 = ss.basis(0, 8), ss.basis(1, 8)
    iv = ss.dist_interval(e0, e1)
    assert iv.lo == iv.hi == 1.0
    assert ss.sup_norm_interval(ss.zeros()).hi == 0.0


def test_linear_sum_matches_combine():
    a = ss.from_finite([1, 2j, 3])
    b = ss.ones(3)
    s = ss.linear_sum([2, -1], [a, b])
    c = ss.combine(2, a, -1, b)
    assert s.same_as(c)


def test_invalid_inputs():
    with pytest.raises(ValueError):
        ss.TailDescriptor.null(-1)
    with pytest.raises(ValueError):
        ss.SeqVec(np.array([np.nan]), ss.TailDescriptor.null())
    with pytest.raises(ValueError):
        ss.NormInterval(2, 1)


def test_to_json_roundtrip_fields():
    j = ss.to_json(ss.ones(2))
    assert j["tail"]["kind"] == "limit" and j["head"] == [[1.0, 0.0], [1.0, 0.0]]
