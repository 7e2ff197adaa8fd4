from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from glbc import polys
from glbc.fields import build_tower


def mobius(n):
    out, k, m = 1, 2, n
    while k * k <= m:
        if m % k == 0:
            m //= k
            if m % k == 0:
                return 0
            out = -out
        k += 1
    return -out if m > 1 else out


def necklace(Q, d):
    return sum(mobius(d // k) * Q ** k for k in range(1, d + 1) if d % k == 0) // d


@pytest.mark.parametrize("Q,d", [(2, 1), (2, 4), (3, 3), (4, 2), (5, 2), (9, 2), (16, 2)])
def test_irreducible_counts(Q, d):
    F = build_tower(Q, [1]).field(1)
    assert len(polys.irreducibles(F, d)) == necklace(Q, d)


def test_fmt_parse_round_trip():
    F = build_tower(4, [1]).field(1)
    for f in polys.irreducibles(F, 2):
        assert polys.parse(polys.fmt(f, 4), 4) == f
    assert polys.fmt((1, 1), 3) == "x+1"


@settings(max_examples=30, deadline=None)
@given(st.sampled_from([2, 3, 4, 5]), st.integers(0, 10 ** 6))
def test_factor_recovers_random_products(Q, seed):
    F = build_tower(Q, [1]).field(1)
    rng = random.Random(seed)
    pool = [f for d in (1, 2, 3) for f in polys.irreducibles(F, d)]
    chosen = [rng.choice(pool) for _ in range(rng.randint(1, 4))]
    prod = (1,)
    for f in chosen:
        prod = polys.mul(F, prod, f)
    expected = {}
    for f in chosen:
        expected[f] = expected.get(f, 0) + 1
    assert dict(polys.factor(F, prod)) == expected


@settings(max_examples=30, deadline=None)
@given(st.lists(st.integers(0, 8), min_size=1, max_size=6), st.lists(st.integers(0, 8), min_size=2, max_size=4))
def test_division_identity(a, b):
    F = build_tower(9, [1]).field(1)
    a, b = polys.trim(a), polys.trim(b)
    if not b:
        return
    qt, r = polys.divmod_(F, a, b)
    assert polys.add(F, polys.mul(F, qt, b), r) == a
    assert len(r) < len(b)
