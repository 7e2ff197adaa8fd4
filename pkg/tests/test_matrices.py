from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from glbc import matrices as mx
from glbc import polys
from glbc.errors import BoundExceeded, SingularMatrix
from glbc.fields import build_tower


def field(Q):
    return build_tower(Q, [1]).field(1)


def random_invertible(F, n, rng):
    while True:
        g = mx.MatF(F, [[rng.randrange(F.size) for _ in range(n)] for _ in range(n)])
        if mx.det(g):
            return g


@pytest.mark.parametrize("n,Q,count", [(2, 2, 3), (2, 3, 8), (3, 2, 6), (3, 3, 24), (4, 2, 14), (2, 4, 15)])
def test_class_counts_and_sizes(n, Q, count):
    F = field(Q)
    classes = list(mx.enumerate_classes(n, F))
    assert len(classes) == count
    assert sum(mx.class_size(c) for c in classes) == mx.group_order(n, Q)


@pytest.mark.parametrize("n,Q", [(2, 3), (3, 2), (2, 4)])
def test_representatives_round_trip(n, Q):
    F = field(Q)
    for c in mx.enumerate_classes(n, F):
        g = mx.representative(c, F)
        assert mx.class_of(g) == c
        assert mx.det(g) == mx.class_det(c, F)
        assert mx.ClassData.from_key(c.key()) == c


def test_centralizers_against_brute_force_orbits():
    F = field(2)
    for c in mx.enumerate_classes(3, F):
        assert mx.conjugation_orbit_size(mx.representative(c, F)) == mx.class_size(c)


def test_enumerated_group_classes_match_sizes():
    F = field(3)
    counts = {}
    for g in mx.enumerate_group(2, F):
        c = mx.class_of(g)
        counts[c] = counts.get(c, 0) + 1
    assert counts == {c: mx.class_size(c) for c in mx.enumerate_classes(2, F)}
    with pytest.raises(BoundExceeded):
        next(mx.enumerate_group(4, field(3), bound=1000))


def test_singular_rejected():
    F = field(2)
    with pytest.raises(SingularMatrix):
        mx.class_of(mx.zero_matrix(F, 2))


@settings(max_examples=40, deadline=None)
@given(st.sampled_from([(2, 5), (3, 3), (3, 4), (4, 2)]), st.integers(0, 10 ** 9))
def test_class_is_conjugation_invariant(nQ, seed):
    n, Q = nQ
    F = field(Q)
    rng = random.Random(seed)
    g, x = random_invertible(F, n, rng), random_invertible(F, n, rng)
    assert mx.class_of(x @ g @ mx.inverse(x)) == mx.class_of(g)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10 ** 9))
def test_merge_is_block_diag(seed):
    rng = random.Random(seed)
    F = field(3)
    a, b = random_invertible(F, 2, rng), random_invertible(F, rng.choice([1, 2]), rng)
    assert mx.merge_classes(mx.class_of(a), mx.class_of(b)) == mx.class_of(mx.block_diag(a, b))


def test_charpoly_matches_class():
    rng = random.Random(1)
    F = field(5)
    for _ in range(20):
        g = random_invertible(F, 3, rng)
        cp = mx.charpoly(g)
        prod = (1,)
        for f, lam in mx.class_of(g).pairs:
            prod = polys.mul(F, prod, polys.power(F, f, sum(lam)))
        assert prod == cp


@pytest.mark.parametrize("n,Q", [(3, 2), (4, 2), (3, 3)])
def test_subspace_counts(n, Q):
    F = field(Q)
    for k in range(n + 1):
        assert sum(1 for _ in mx.rref_subspaces(F, n, k)) == mx.gaussian_binomial(n, k, Q)


def test_invariant_subspaces_of_identity_and_regular():
    F = field(2)
    assert len(list(mx.invariant_subspaces(mx.identity(F, 3), 1))) == 7
    # an irreducible cubic has no proper invariant subspaces
    f = polys.irreducibles(F, 3)[0]
    assert not list(mx.invariant_subspaces(mx.companion(F, f), 1))


def test_weil_embedding():
    t = build_tower(2, [2])
    E, F = t.field(2), t.field(1)
    g = mx.MatF(E, [[E.gen]])
    assert mx.weil_embed(g, t, F).rows == ((0, 1), (1, 1))
    rng = random.Random(3)
    t3 = build_tower(3, [2])
    E3, F3 = t3.field(2), t3.field(1)
    for _ in range(10):
        a, b = random_invertible(E3, 2, rng), random_invertible(E3, 2, rng)
        assert mx.weil_embed(a @ b, t3, F3) == mx.weil_embed(a, t3, F3) @ mx.weil_embed(b, t3, F3)


def test_weil_of_scalar_has_norm_determinant():
    t = build_tower(3, [2])
    E, F = t.field(2), t.field(1)
    for x in E.units():
        m = mx.mult_matrix(t, x, E, F)
        assert mx.det(m) == t.norm_to_subfield(x, 2, 1)


@pytest.mark.parametrize("n,q", [(1, 2), (2, 2), (1, 3), (2, 3)])
def test_descend_basechange_round_trip(n, q):
    t = build_tower(q, [2])
    E, F = t.field(2), t.field(1)
    for c in mx.enumerate_classes(n, F):
        assert mx.descend_class(mx.basechange_class(c, t, E), t, F) == c


def test_shintani_norm_of_scalar_is_field_norm():
    t = build_tower(3, [2])
    E, F = t.field(2), t.field(1)
    g = mx.MatF(E, [[E.gen]])
    nm = t.norm_to_subfield(E.gen, 2, 1)
    assert mx.shintani_norm(g, t, F) == mx.class_of(mx.MatF(F, [[nm]]))
