from __future__ import annotations

import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from glbc import chars as ch
from glbc import matrices as mx
from glbc import mult
from glbc.errors import BoundExceeded, ParityViolation
from glbc.fields import MultChar, build_tower, char_eval, regular_orbit_reps

SUBGROUPS = [
    (mult.LeviNN(1, 3), build_tower(3, [2])),
    (mult.LeviNN(2, 2), build_tower(2, [4])),
    (mult.SplitTorus(3, 3), build_tower(3, [1])),
    (mult.WeilGLnE(1, 3), build_tower(3, [2])),
    (mult.WeilGLnE(2, 2), build_tower(2, [4])),
    (mult.SubfieldGLn(2, 2), build_tower(2, [2])),
    (mult.WholeGroup(2, 3), build_tower(3, [2])),
]


@pytest.mark.parametrize("H,tower", SUBGROUPS, ids=lambda x: x.label() if hasattr(x, "label") else "")
def test_iterators_cover_the_subgroup(H, tower):
    assert sum(w for _, _, w in H.element_data(tower)) == H.order
    assert sum(w for _, _, w in H.class_data(tower)) == H.order
    elem = {}
    for amb, _, w in H.element_data(tower):
        elem[amb] = elem.get(amb, 0) + w
    cls = {}
    for amb, _, w in H.class_data(tower):
        cls[amb] = cls.get(amb, 0) + w
    assert elem == cls


@pytest.mark.parametrize("H,tower", SUBGROUPS[:6], ids=lambda x: x.label() if hasattr(x, "label") else "")
def test_embeddings_are_homomorphisms(H, tower):
    import random

    rng = random.Random(7)
    pools = [list(mx.enumerate_group(n, tower.field_of_size(Q))) for n, Q in H.factors]
    for _ in range(10):
        a = [rng.choice(p) for p in pools]
        b = [rng.choice(p) for p in pools]
        ab = [x @ y for x, y in zip(a, b)]
        assert H.embed(ab, tower) == H.embed(a, tower) @ H.embed(b, tower)


def test_self_multiplicity_over_whole_group():
    tower = build_tower(2, [4])
    for a in regular_orbit_reps(16, 4, 2):
        pi = ch.Cuspidal(4, 2, a)
        assert mult.multiplicity(pi, mult.WholeGroup(4, 2), (pi,), tower, "classwise") == 1


def test_trivial_subgroup_gives_dimension():
    pi = ch.Cuspidal(4, 2, 1)
    H = mult.SplitTorus(4, 2)
    assert H.order == 1
    assert mult.multiplicity(pi, H, (ch.GL1Char(2, 0),) * 4) == ch.dim_of(pi) == 21


def test_spec_examples():
    tower = build_tower(3, [2])
    for a in regular_orbit_reps(9, 2, 3):
        for c1 in range(2):
            for c2 in range(2):
                m = mult.multiplicity(ch.Cuspidal(2, 3, a), mult.SplitTorus(2, 3),
                                      (ch.GL1Char(3, c1), ch.GL1Char(3, c2)), tower)
                assert m == int((c1 + c2 - a) % 2 == 0)
    pi = ch.Cuspidal(4, 2, 3)
    assert mult.multiplicity(pi, mult.LeviNN(2, 2), (ch.DetChar(2, 2, 0),) * 2) == 1


def test_method_both_enforces_bound(monkeypatch):
    from glbc import subgroups

    monkeypatch.setattr(subgroups, "ELEMENT_BOUND", 3)
    with pytest.raises(BoundExceeded):
        mult.multiplicity(ch.Cuspidal(2, 3, 1), mult.SplitTorus(2, 3), (ch.GL1Char(3, 0),) * 2, method="both")
    # auto falls back to the class path only
    assert mult._resolve_method(mult.SplitTorus(2, 3), "auto") == ["classwise"]


cases = st.sampled_from([
    (ch.Cuspidal(2, 3, 1), mult.SplitTorus(2, 3)),
    (ch.Cuspidal(2, 4, 1), mult.SplitTorus(2, 4)),
    (ch.Cuspidal(4, 2, 7), mult.LeviNN(2, 2)),
    (ch.Cuspidal(4, 2, 3), mult.WeilGLnE(2, 2)),
    (ch.Cuspidal(2, 9, 1), mult.SubfieldGLn(2, 3)),
    (ch.Induced(ch.GL1Char(5, 1), ch.GL1Char(5, 3)), mult.SplitTorus(2, 5)),
])


@settings(max_examples=25, deadline=None)
@given(cases, st.data())
def test_elementwise_equals_classwise(case, data):
    pi, H = case
    exps = [data.draw(st.integers(0, Q - 2)) for _, Q in H.factors]
    chis = tuple(ch.DetChar(n, Q, c) for (n, Q), c in zip(H.factors, exps))
    tower = mult.tower_for_problem(pi, H, *chis)
    e = mult.multiplicity(pi, H, chis, tower, "elementwise")
    c = mult.multiplicity(pi, H, chis, tower, "classwise")
    assert e == c >= 0
    fib = mult.det_fibers(pi, H, tower, "elementwise")
    assert mult.fiber_multiplicity(fib, H, exps, tower) == e


@settings(max_examples=15, deadline=None)
@given(st.sampled_from(regular_orbit_reps(81, 4, 3)), st.integers(0, 1), st.integers(0, 1))
def test_frobenius_invariance(a, c1, c2):
    tower = build_tower(3, [4])
    H = mult.LeviNN(2, 3)
    chis = (ch.DetChar(2, 3, c1), ch.DetChar(2, 3, c2))
    m1 = mult.multiplicity(ch.Cuspidal(4, 3, a), H, chis, tower, "classwise")
    m2 = mult.multiplicity(ch.Cuspidal(4, 3, a * 3), H, chis, tower, "classwise")
    assert m1 == m2


# -- predictors derived pointwise ----------------------------------------------------

@pytest.mark.parametrize("two_n,q", [(2, 3), (2, 5), (4, 2), (4, 3)])
def test_thm41_predictor_from_pointwise_norm_condition(two_n, q):
    n = two_n // 2
    tower = build_tower(q, [two_n])
    K, F = tower.field_of_size(q ** n), tower.field(1)
    M = ch.working_conductor(tower)
    for a in regular_orbit_reps(q ** two_n, two_n, q):
        theta = MultChar(q ** two_n, a)
        for c1 in range(q - 1):
            for c2 in range(q - 1):
                chi = MultChar(q, c1 + c2)
                holds = all(
                    char_eval(tower, theta, tower.embed(x, K.d, tower.D), M)
                    == char_eval(tower, chi, tower.norm_to_subfield(x, K.d, 1), M)
                    for x in K.units())
                assert holds == bool(mult.predict_thm41(a, c1, c2, n, q))
    assert F.size == q


@pytest.mark.parametrize("two_n,q", [(4, 2), (4, 3)])
def test_thm53_predictor_from_pointwise_norm_condition(two_n, q):
    n = two_n // 2
    tower = build_tower(q, [two_n])
    K, F, E = tower.field_of_size(q ** n), tower.field(1), tower.field(2)
    M = ch.working_conductor(tower)
    for a in regular_orbit_reps(q ** two_n, two_n, q):
        theta = MultChar(q ** two_n, a)
        for c in range(q * q - 1):
            chi = MultChar(q * q, c)

            def chi_on_F(y):
                return char_eval(tower, chi, tower.embed(y, 1, 2), M)

            holds = all(
                char_eval(tower, theta, tower.embed(x, K.d, tower.D), M)
                == chi_on_F(tower.norm_to_subfield(x, K.d, 1))
                for x in K.units())
            assert holds == bool(mult.predict_thm53(a, c, n, q))
    assert E.size == q * q and F.size == q


def test_prop51_predictor_examples():
    # n = 1, q = 3: the condition is a even, and the search agrees
    for a in range(8):
        assert mult.predict_prop51(a, 1, 3) == (a % 2 == 0) == mult.dual_is_conjugate(a, 1, 3)
    for a in regular_orbit_reps(81, 2, 9):
        assert not mult.predict_prop51(a, 2, 3)


# -- twisted multiplicity -------------------------------------------------------------

def test_shintani_collapsed_form():
    assert mult.shintani_twisted_multiplicity(1, 1) == 1
    assert mult.shintani_twisted_multiplicity(0, 0) == 0
    assert mult.shintani_twisted_multiplicity(2, 0) == 1
    with pytest.raises(ParityViolation):
        mult.shintani_twisted_multiplicity(1, 0)
    with pytest.raises(ParityViolation):
        mult.shintani_twisted_multiplicity(0, 2)


def test_gl4_f2_levi_basechange_parity():
    res = mult.verify_thm41(4, 2, basechange=True)
    rep = next(r for r in res.reports if r.inputs["theta"] == 3)
    assert (rep.m, rep.m_E, rep.m_tilde) == (1, 1, 1)


def test_bc_relation_sweep_sizes():
    res = mult.verify_bc_relation(2, 3, subgroups=("weil",))
    assert len(res.reports) == 3 * 8 and res.passed
    res = mult.verify_bc_relation(4, 2, subgroups=("weil",))
    assert len(res.reports) == 3 * 3 and res.passed
    # m_E = 0 forces m = 0
    assert all(r.m == 0 for r in res.reports if r.m_E == 0)


# -- individual verifiers on their spec examples ---------------------------------------

def test_thm41_gl4_f2():
    res = mult.verify_thm41(4, 2)
    assert [(r.inputs["theta"], r.m) for r in res.reports] == [(1, 0), (3, 1), (7, 0)]


def test_thm53_gl4_f2_and_cor55():
    res = mult.verify_thm53(4, 2)
    assert res.passed
    assert {r.inputs["theta"] for r in res.reports if r.m} == {3}
    assert all(r.inputs["cor5.5"]["twist_dual_iso"] == bool(r.m) for r in res.reports)


def test_remark56_counts():
    for q, present in [(3, 2), (4, 3), (5, 4)]:
        res = mult.verify_remark56(q)
        assert res.passed
        assert all(r.computed["present"] == present for r in res.reports)


def test_cor24_examples():
    assert [r.m for r in mult.verify_cor24(2, 2).reports] == [0] * 6
    res = mult.verify_cor24(3, 2)
    assert sorted(r.inputs["theta"] for r in res.reports if r.m) == [7, 14]
    assert all(r.inputs["theta"] % 7 == 0 for r in res.reports if r.m)


def test_thm31_gl2_f2_isomorphic_factors():
    res = mult.verify_thm31(2, 2)
    (rep,) = res.reports
    assert rep.m == rep.predicted == 2


def test_thm31_n1_equal_characters_is_a_finding():
    res = mult.verify_thm31(1, 3)
    assert res.passed
    assert {(tuple(f["factors"]), f["m"], f["predicted"]) for f in res.findings} == {
        (("gl1:3:0", "gl1:3:0"), 3, 2), (("gl1:3:1", "gl1:3:1"), 3, 2)}


def test_psi_identity_part_dimension():
    tower = build_tower(2, [4])
    F = tower.field(1)
    ident = mx.class_of(mx.identity(F, 2))
    for a in regular_orbit_reps(16, 4, 2):
        v = mult.psi_identity_char_value(ch.Cuspidal(4, 2, a), ident, tower)
        assert v.as_integer() == mx.group_order(2, 2) // 3


def test_radical_zero_term_is_levi_value():
    tower = build_tower(3, [4])
    F = tower.field(1)
    cs = list(mx.enumerate_classes(2, F))
    for c1, c2 in [(cs[0], cs[3]), (cs[5], cs[5])]:
        assert mult._unipotent_classes(F, c1, c2, 2)[0] == mx.merge_classes(c1, c2)


def test_example25_q5():
    res = mult.verify_example25(5)
    got = {(r.inputs["kind"], tuple(r.inputs["theta"])): r.m for r in res.reports}
    assert got == {("P", (1, 1, 1)): 1, ("D", (1, 1, 1)): 1, ("D", (1, 1, 2)): 0,
                   ("D", (1, 2, 2)): 1, ("D", (2, 2, 2)): 0}


def test_bounds():
    with pytest.raises(BoundExceeded):
        mult.verify_thm41(40, 9)
    with pytest.raises(ValueError):
        mult.verify_thm41(3, 2)


# -- reports --------------------------------------------------------------------------

def test_report_schema_and_determinism():
    a = mult.verify_thm41(2, 3)
    b = mult.verify_thm41(2, 3, threads=4)
    assert json.dumps(a.to_json(), sort_keys=True) == json.dumps(b.to_json(), sort_keys=True)
    row = a.reports[0].to_json()
    assert set(row) >= {"inputs", "m", "m_E", "m_tilde", "predicted", "computed", "pass", "counterexamples", "wall_ms"}
    assert row["wall_ms"] is None
    header = a.to_csv().splitlines()[0]
    assert header == "verifier,q,n,theta_orbit_rep,chi1,chi2,predicted,computed,pass,wall_ms"
    timed = mult.verify_thm41(2, 3, timing=True)
    assert all(r.wall_ms is not None for r in timed.reports)
