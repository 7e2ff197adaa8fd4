"""Multiplicities dim Hom_H(pi, chi) for finite GL_n and the checks built on them.

The engine sums Theta_pi(h) * conj chi(h) over an :class:`EmbeddedSubgroup`,
either element by element or class by class. When chi is one-dimensional on
every factor, :func:`det_fibers` groups the sum by the determinants of the
factors so that every chi costs one short pass.
"""
from __future__ import annotations

import csv
import io
import json
import time
from dataclasses import dataclass, field

from . import chars as ch
from . import matrices as mx
from . import subgroups as sg
from .cyclo import Accumulator, CycValue
from .errors import BoundExceeded, ParityViolation
from .fields import FieldTower, build_tower
from .subgroups import (
    ELEMENT_BOUND,
    BlockLevi,
    EmbeddedSubgroup,
    LeviNN,
    SplitTorus,
    SubfieldGLn,
    WeilGLnE,
    WholeGroup,
)

__all__ = [
    "ELEMENT_BOUND", "BlockLevi", "EmbeddedSubgroup", "LeviNN", "SplitTorus", "SubfieldGLn",
    "WeilGLnE", "WholeGroup", "tower_for_problem", "multiplicity", "det_fibers",
    "fiber_multiplicity", "MultReport", "shintani_twisted_multiplicity",
]


def tower_for_problem(pi: ch.CharSpec, H: EmbeddedSubgroup, *chis: ch.CharSpec) -> FieldTower:
    """Smallest tower holding the ambient group, every factor, and every spec."""
    sizes = [H.ambient[1]] + [Q for _, Q in H.factors]
    for s in (pi,) + chis:
        sizes.extend(ch._needed_sizes(s))
    base = min(sizes)
    return build_tower(base, [ch._log_exact(Q, base) for Q in sizes])


def _resolve_method(H: EmbeddedSubgroup, method: str) -> list:
    bound = sg.ELEMENT_BOUND
    if method == "auto":
        return ["elementwise", "classwise"] if H.order <= bound else ["classwise"]
    if method == "both":
        if H.order > bound:
            raise BoundExceeded(f"|H| = {H.order} exceeds the element bound {bound}")
        return ["elementwise", "classwise"]
    if method in ("elementwise", "classwise"):
        return [method]
    raise ValueError(f"unknown method {method!r}")


class MethodMismatch(AssertionError):
    pass


def _agree(results: dict, what: str):
    vals = set(map(_freeze, results.values()))
    if len(vals) > 1:
        raise MethodMismatch(f"{what}: elementwise and classwise sums differ: {results}")


def _freeze(v):
    if isinstance(v, dict):
        return tuple(sorted((k, _freeze(x)) for k, x in v.items()))
    if isinstance(v, CycValue):
        return v.reduce()
    return v


def multiplicity(pi: ch.CharSpec, H: EmbeddedSubgroup, chis, tower: FieldTower | None = None,
                 method: str = "auto") -> int:
    """dim Hom_H(pi|H, chi_1 x ... x chi_k); chis holds one spec per factor of H.

    With method 'auto' both sums run when |H| is within the element bound and
    must agree.
    """
    chis = tuple(chis)
    if len(chis) != len(H.factors):
        raise ValueError(f"{len(H.factors)} factor characters needed, got {len(chis)}")
    tower = tower or tower_for_problem(pi, H, *chis)
    M = ch.working_conductor(tower)
    results = {}
    for meth in _resolve_method(H, method):
        acc = Accumulator(M)
        for amb, nat, w in H.data(tower, meth):
            v = ch.class_value(pi, amb, tower, M)
            for s, c in zip(chis, nat):
                v = v * ch.class_value(s, c, tower, M).conj()
            acc.add(v, 0, w)
        results[meth] = acc.value().divide_exact(H.order).as_integer()
    _agree(results, f"multiplicity of {ch.spec_str(pi)} on {H.label()}")
    return next(iter(results.values()))


def _native_log(c: mx.ClassData, tower: FieldTower) -> int:
    """dlog of det(c) relative to the tower generator of the class's level."""
    F = tower.field_of_size(c.q)
    top = tower.field(tower.D).order
    L_top = tower.dlog(tower.embed(mx.class_det(c, F), F.d, tower.D), tower.D)
    return L_top // (top // (c.q - 1))


def det_fibers(pi: ch.CharSpec, H: EmbeddedSubgroup, tower: FieldTower, method: str = "classwise") -> dict:
    """{(log det h_1, ..., log det h_k): sum of Theta_pi over that fiber of H}."""
    M = ch.working_conductor(tower)
    accs: dict = {}
    for amb, nat, w in H.data(tower, method):
        key = tuple(_native_log(c, tower) for c in nat)
        acc = accs.get(key)
        if acc is None:
            acc = accs[key] = Accumulator(M)
        acc.add(ch.class_value(pi, amb, tower, M), 0, w)
    return {k: a.value() for k, a in sorted(accs.items())}


def det_fibers_checked(pi, H, tower, method: str = "auto") -> dict:
    results = {meth: det_fibers(pi, H, tower, meth) for meth in _resolve_method(H, method)}
    _agree(results, f"determinant fibers of {ch.spec_str(pi)} on {H.label()}")
    return next(iter(results.values()))


def fiber_multiplicity(fibers: dict, H: EmbeddedSubgroup, chi_exponents, tower: FieldTower) -> int:
    """Multiplicity of the character h -> prod_i chi_i(det h_i) given exponents chi_i."""
    M = ch.working_conductor(tower)
    steps = [M // (Q - 1) for _, Q in H.factors]
    acc = Accumulator(M)
    for key, S in fibers.items():
        shift = -sum(c * L * s for c, L, s in zip(chi_exponents, key, steps))
        acc.add(S, shift)
    return acc.value().divide_exact(H.order).as_integer()


def shintani_twisted_multiplicity(m_E: int, m: int) -> int:
    """The sigma-twisted multiplicity from the collapsed trace identity 2*m_tilde = m_E + m."""
    if (m_E + m) % 2:
        raise ParityViolation(f"m_E = {m_E} and m = {m} have different parity")
    mt = (m_E + m) // 2
    if not 0 <= mt <= m_E:
        raise ParityViolation(f"twisted multiplicity {mt} outside [0, {m_E}]")
    return mt


# -- reports --------------------------------------------------------------------

CSV_COLUMNS = ["verifier", "q", "n", "theta_orbit_rep", "chi1", "chi2", "predicted", "computed", "pass", "wall_ms"]


@dataclass
class MultReport:
    """One checked case; ``inputs`` carries the verifier-specific parameters."""

    verifier: str
    inputs: dict
    m: int | None = None
    m_E: int | None = None
    m_tilde: int | None = None
    predicted: object = None
    computed: object = None
    passed: bool = True
    counterexamples: list = field(default_factory=list)
    wall_ms: float | None = None

    def to_json(self) -> dict:
        return {
            "verifier": self.verifier,
            "inputs": self.inputs,
            "m": self.m,
            "m_E": self.m_E,
            "m_tilde": self.m_tilde,
            "predicted": self.predicted,
            "computed": self.computed,
            "pass": self.passed,
            "counterexamples": self.counterexamples,
            "wall_ms": self.wall_ms,
        }

    def csv_row(self) -> dict:
        i = self.inputs
        return {
            "verifier": self.verifier,
            "q": i.get("q"),
            "n": i.get("n"),
            "theta_orbit_rep": i.get("theta"),
            "chi1": i.get("chi1", i.get("chi")),
            "chi2": i.get("chi2"),
            "predicted": _cell(self.predicted),
            "computed": _cell(self.computed),
            "pass": self.passed,
            "wall_ms": self.wall_ms,
        }


def _cyc_cell(v: CycValue) -> str:
    """Canonical text for an exact value: reduced coefficients on the power basis."""
    return repr(CycValue(v.m, dict(enumerate(v.reduce()))))


def _cell(v):
    if isinstance(v, (dict, list)):
        return json.dumps(v, sort_keys=True)
    return v


@dataclass
class VerifyResult:
    verifier: str
    params: dict
    reports: list = field(default_factory=list)
    findings: list = field(default_factory=list)
    wall_ms: float | None = None

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.reports)

    @property
    def failures(self) -> list:
        return [r for r in self.reports if not r.passed]

    def to_json(self) -> dict:
        return {
            "verifier": self.verifier,
            "params": self.params,
            "pass": self.passed,
            "cases": len(self.reports),
            "failures": len(self.failures),
            "findings": self.findings,
            "reports": [r.to_json() for r in self.reports],
            "wall_ms": self.wall_ms,
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
        w.writeheader()
        for r in self.reports:
            w.writerow(r.csv_row())
        return buf.getvalue()


class _Timer:
    def __init__(self, enabled: bool):
        self.enabled = enabled
        self.t0 = time.perf_counter()

    def ms(self):
        if not self.enabled:
            return None
        return round((time.perf_counter() - self.t0) * 1000, 3)


# -- sweeps -----------------------------------------------------------------------

# desk-scale bounds for sweeps; the CLI turns BoundExceeded into exit code 2
MAX_TWO_N = 6
MAX_TOP_FIELD = 6561


def check_sweep_bounds(two_n: int, q: int):
    from .fields import prime_power

    prime_power(q)
    if two_n < 2 or two_n % 2:
        raise ValueError(f"2n must be a positive even integer, got {two_n}")
    if two_n > MAX_TWO_N or q ** two_n > MAX_TOP_FIELD:
        raise BoundExceeded(
            f"GL_{two_n}(F_{q}) is beyond desk scale (need 2n <= {MAX_TWO_N} and q^(2n) <= {MAX_TOP_FIELD})"
        )


def _pmap(fn, items, threads: int):
    items = list(items)
    if threads <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    from concurrent.futures import ThreadPoolExecutor

    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _orbit_reps(two_n: int, q: int) -> list:
    from .fields import regular_orbit_reps

    return regular_orbit_reps(q ** two_n, two_n, q)


_fiber_cache: dict = {}


def _cached_fibers(pi, H, tower, method):
    key = (pi, H, id(tower), method)
    f = _fiber_cache.get(key)
    if f is None:
        f = det_fibers_checked(pi, H, tower, method)
        _fiber_cache[key] = f
    return f


def _basechange_fibers(pi: ch.Cuspidal, two_n: int, q: int, tower):
    """Determinant fibers of the basechange of pi on GL_n(E) x GL_n(E), classwise."""
    n = two_n // 2
    return _cached_fibers(ch.basechange_spec(pi), LeviNN(n, q * q), tower, "classwise")


def _with_basechange(rep: MultReport, m_E: int):
    rep.m_E = m_E
    rep.m_tilde = shintani_twisted_multiplicity(m_E, rep.m)
    if rep.m > m_E:
        raise ParityViolation(f"m = {rep.m} exceeds m_E = {m_E} for {rep.inputs}")


def predict_thm41(a: int, c1: int, c2: int, n: int, q: int) -> int:
    """1 iff theta restricted to F_{q^n}^x equals (chi_1 chi_2) composed with the norm."""
    N = q ** n - 1
    return int((a - (c1 + c2) * (N // (q - 1))) % N == 0)


def verify_thm41(two_n: int, q: int, method: str = "auto", basechange: bool = False,
                 timing: bool = False, threads: int = 1) -> VerifyResult:
    check_sweep_bounds(two_n, q)
    ch.require_green_validated()
    clock = _Timer(timing)
    n = two_n // 2
    tower = build_tower(q, [two_n])
    H = LeviNN(n, q)

    def one(a):
        t = _Timer(timing)
        pi = ch.Cuspidal(two_n, q, a)
        fib = _cached_fibers(pi, H, tower, method)
        fibE = _basechange_fibers(pi, two_n, q, tower) if basechange else None
        out = []
        for c1 in range(q - 1):
            for c2 in range(q - 1):
                m = fiber_multiplicity(fib, H, (c1, c2), tower)
                pred = predict_thm41(a, c1, c2, n, q)
                rep = MultReport("thm4.1", {"q": q, "n": two_n, "theta": a, "chi1": c1, "chi2": c2,
                                            "subgroup": H.label()},
                                 m=m, predicted=pred, computed=m, passed=(m == pred and m <= 1))
                if basechange:
                    _with_basechange(rep, fiber_multiplicity(fibE, LeviNN(n, q * q), (c1 * (q + 1), c2 * (q + 1)), tower))
                if not rep.passed:
                    rep.counterexamples.append({"theta": a, "chi": [c1, c2], "m": m, "predicted": pred})
                out.append(rep)
        for r in out:
            r.wall_ms = t.ms()
        return out

    res = VerifyResult("thm4.1", {"two_n": two_n, "q": q, "method": method})
    for reps in _pmap(one, _orbit_reps(two_n, q), threads):
        res.reports.extend(reps)
    res.wall_ms = clock.ms()
    return res


def predict_thm53(a: int, c: int, n: int, q: int) -> int:
    """1 iff theta restricted to F_{q^n}^x equals chi|F^x composed with the norm."""
    N = q ** n - 1
    cbar = c % (q - 1)
    return int((a - cbar * (N // (q - 1))) % N == 0)


def predict_remark56(a: int, c: int, q: int) -> int:
    """GL_2 exception: chi with chi|F^x = theta|F^x appears unless chi is theta or its conjugate."""
    E1 = q * q - 1
    if (c - a) % (q - 1):
        return 0
    return int(c % E1 not in {a % E1, (a * q) % E1})


def verify_thm53(two_n: int, q: int, method: str = "auto", basechange: bool = False,
                 timing: bool = False, threads: int = 1) -> VerifyResult:
    """Weil-restricted subgroup sweep; for 2n = 2 the expected values follow the GL_2 exception."""
    check_sweep_bounds(two_n, q)
    ch.require_green_validated()
    clock = _Timer(timing)
    n = two_n // 2
    tower = build_tower(q, [two_n])
    H = WeilGLnE(n, q)
    E = q * q

    def one(a):
        t = _Timer(timing)
        pi = ch.Cuspidal(two_n, q, a)
        fib = _cached_fibers(pi, H, tower, method)
        fibE = _basechange_fibers(pi, two_n, q, tower) if basechange else None
        dual = ch.dual_spec(pi)
        out = []
        for c in range(E - 1):
            m = fiber_multiplicity(fib, H, (c,), tower)
            pred = predict_thm53(a, c, n, q) if n > 1 else predict_remark56(a, c, q)
            inputs = {"q": q, "n": two_n, "theta": a, "chi": c, "subgroup": H.label()}
            rep = MultReport("thm5.3", inputs, m=m, predicted=pred, computed=m, passed=(m == pred and m <= 1))
            if n > 1:
                twisted = ch.iso_test(pi, ch.twist_spec(dual, c % (q - 1)))
                cor = {"twist_dual_iso": twisted}
                ok = (m == 1) == twisted
                if c == 0:
                    restricted_trivial = a % (q ** n - 1) == 0
                    self_dual = ch.iso_test(pi, dual)
                    cor.update(restricted_trivial=restricted_trivial, self_dual=self_dual)
                    ok = ok and (m == 1) == restricted_trivial == self_dual
                inputs["cor5.5"] = cor
                if not ok:
                    rep.passed = False
            if basechange:
                _with_basechange(rep, fiber_multiplicity(fibE, LeviNN(n, E), (c, c * q), tower))
            if not rep.passed:
                rep.counterexamples.append({"theta": a, "chi": c, "m": m, "predicted": pred})
            out.append(rep)
        for r in out:
            r.wall_ms = t.ms()
        return out

    res = VerifyResult("thm5.3", {"two_n": two_n, "q": q, "method": method})
    for reps in _pmap(one, _orbit_reps(two_n, q), threads):
        res.reports.extend(reps)
    res.wall_ms = clock.ms()
    return res


def verify_cor55(two_n: int, q: int, **kw) -> VerifyResult:
    res = verify_thm53(two_n, q, **kw)
    res.verifier = "cor5.5"
    for r in res.reports:
        r.verifier = "cor5.5"
    return res


def verify_bc_relation(two_n: int, q: int, subgroups=("levi", "weil"), method: str = "auto",
                       timing: bool = False, threads: int = 1, verifier: str = "prop2.1") -> VerifyResult:
    """Both sweeps with m_E attached; a parity or bound failure raises ParityViolation."""
    clock = _Timer(timing)
    res = VerifyResult(verifier, {"two_n": two_n, "q": q, "subgroups": list(subgroups)})
    for s in subgroups:
        fn = {"levi": verify_thm41, "weil": verify_thm53}[s]
        sub = fn(two_n, q, method=method, basechange=True, timing=timing, threads=threads)
        for r in sub.reports:
            ok = r.m <= r.m_E and (r.m - r.m_E) % 2 == 0 and 0 <= r.m_tilde <= r.m_E
            res.reports.append(MultReport(
                verifier, dict(r.inputs, sweep=sub.verifier), m=r.m, m_E=r.m_E, m_tilde=r.m_tilde,
                predicted="m <= m_E, m = m_E mod 2", computed={"m": r.m, "m_E": r.m_E},
                passed=ok, wall_ms=r.wall_ms))
    res.wall_ms = clock.ms()
    return res


def verify_remark56(q: int, method: str = "auto", timing: bool = False, threads: int = 1) -> VerifyResult:
    """E^x inside GL_2(F_q): the q+1 candidates agreeing with theta on F^x, two of them absent."""
    if q > 9:
        raise BoundExceeded("the GL_2 exception sweep is limited to q <= 9")
    ch.require_green_validated()
    clock = _Timer(timing)
    tower = build_tower(q, [2])
    H = WeilGLnE(1, q)
    E1 = q * q - 1

    def one(a):
        t = _Timer(timing)
        fib = _cached_fibers(ch.Cuspidal(2, q, a), H, tower, method)
        cands = [c for c in range(E1) if (c - a) % (q - 1) == 0]
        ms = {c: fiber_multiplicity(fib, H, (c,), tower) for c in cands}
        absent = sorted(c for c, m in ms.items() if m == 0)
        expected = sorted({a % E1, (a * q) % E1})
        ok = len(cands) == q + 1 and absent == expected and all(m in (0, 1) for m in ms.values())
        rep = MultReport("rem5.6", {"q": q, "n": 2, "theta": a, "candidates": cands},
                         predicted={"absent": expected, "present": q - 1},
                         computed={"absent": absent, "present": sum(1 for m in ms.values() if m == 1)},
                         passed=ok, wall_ms=t.ms())
        if not ok:
            rep.counterexamples.append({"theta": a, "multiplicities": ms})
        return rep

    res = VerifyResult("rem5.6", {"q": q})
    res.reports = _pmap(one, _orbit_reps(2, q), threads)
    res.wall_ms = clock.ms()
    return res


def predict_prop51(a: int, n: int, q: int) -> bool:
    return n % 2 == 1 and a % (q ** n - 1) == 0


def dual_is_conjugate(a: int, n: int, q: int) -> bool:
    """Direct search: is -a = a * q^j modulo q^(2n) - 1 for some odd j?"""
    N = q ** (2 * n) - 1
    return any((a + a * q ** j) % N == 0 for j in range(1, 2 * n, 2))


def verify_prop51(n: int, q: int, timing: bool = False, threads: int = 1) -> VerifyResult:
    """Cuspidal pi of GL_n(F_{q^2}) with dual isomorphic to its Galois conjugate."""
    if q ** (2 * n) > MAX_TOP_FIELD:
        raise BoundExceeded(f"F_{q ** (2 * n)} is beyond desk scale")
    clock = _Timer(timing)
    E = q * q
    N = E ** n - 1
    res = VerifyResult("prop5.1", {"n": n, "q": q})
    for a in range(N):
        if not ch.is_regular_exponent(a, n, E):
            continue
        pi = ch.Cuspidal(n, E, a)
        pred = predict_prop51(a, n, q)
        direct = dual_is_conjugate(a, n, q)
        symbolic = ch.iso_test(ch.dual_spec(pi), ch.frobenius_spec(pi, q))
        rep = MultReport("prop5.1", {"q": q, "n": n, "theta": a}, predicted=pred,
                         computed={"direct": direct, "iso": symbolic}, passed=pred == direct == symbolic)
        if not rep.passed:
            rep.counterexamples.append({"theta": a})
        res.reports.append(rep)
    res.wall_ms = clock.ms()
    return res


def verify_cor24(n: int, q: int, method: str = "auto", timing: bool = False, threads: int = 1) -> VerifyResult:
    """GL_n(F_q)-fixed vectors in cuspidal pi of GL_n(F_{q^2}) against [pi^sigma = pi^dual]."""
    E = q * q
    if E ** n > MAX_TOP_FIELD:
        raise BoundExceeded(f"F_{E ** n} is beyond desk scale")
    ch.require_green_validated()
    clock = _Timer(timing)
    tower = build_tower(q, [2 * n])
    H = SubfieldGLn(n, q)
    from .fields import regular_orbit_reps

    def one(a):
        t = _Timer(timing)
        pi = ch.Cuspidal(n, E, a)
        m = multiplicity(pi, H, (ch.DetChar(n, q, 0),), tower, method)
        pred = ch.iso_test(ch.frobenius_spec(pi, q), ch.dual_spec(pi))
        rep = MultReport("cor2.4", {"q": q, "n": n, "theta": a, "subgroup": H.label()}, m=m,
                         predicted=int(pred), computed=m, passed=m == int(pred), wall_ms=t.ms())
        if not rep.passed:
            rep.counterexamples.append({"theta": a, "m": m})
        return rep

    res = VerifyResult("cor2.4", {"n": n, "q": q})
    res.reports = _pmap(one, regular_orbit_reps(E ** n, n, E), threads)
    res.wall_ms = clock.ms()
    return res


def predict_thm31(p1: ch.CharSpec, p2: ch.CharSpec, c1: int, c2: int, tower: FieldTower | None = None) -> int:
    """Predicted multiplicity of chi_1 x chi_2 (on GL_n x GL_n) in p1 x p2.

    For n = 1 the GL_2 rule applies: mu_1 x mu_2 with mu_1 mu_2 = lambda_1 lambda_2
    occurs once, twice when it is lambda_1 x lambda_2 or lambda_2 x lambda_1.
    """
    n, q = p1.n, p1.q
    if n == 1:
        l1, l2 = ch._as_one_dim(p1)[3], ch._as_one_dim(p2)[3]
        if (c1 + c2 - l1 - l2) % (q - 1):
            return 0
        return 2 if c1 % (q - 1) in (l1, l2) else 1
    first = int(ch.iso_test(ch.dual_spec(ch.twist_spec(p1, -c1)), ch.twist_spec(p2, -c2)))
    if n % 2:
        return first
    h = n // 2
    L = LeviNN(h, q)
    chis = (ch.DetChar(h, q, c1), ch.DetChar(h, q, c2))
    return first + multiplicity(p1, L, chis, tower) * multiplicity(p2, L, chis, tower)


def _thm31_factors(n: int, q: int) -> list:
    if n == 1:
        return [ch.GL1Char(q, c) for c in range(q - 1)]
    from .fields import regular_orbit_reps

    return [ch.Cuspidal(n, q, a) for a in regular_orbit_reps(q ** n, n, q)]


def verify_thm31(n: int, q: int, method: str = "auto", timing: bool = False, threads: int = 1) -> VerifyResult:
    """Induced p1 x p2 restricted to GL_n x GL_n; isomorphic factors give findings, not failures."""
    if n > 2 or q ** (2 * n) > MAX_TOP_FIELD:
        raise BoundExceeded("the induced-representation sweep is limited to n <= 2 at desk scale")
    ch.require_green_validated()
    clock = _Timer(timing)
    tower = build_tower(q, [2 * n]) if n > 1 else build_tower(q, [1])
    H = LeviNN(n, q)
    facs = _thm31_factors(n, q)
    pairs = [(facs[i], facs[j]) for i in range(len(facs)) for j in range(i, len(facs))]

    def one(pair):
        t = _Timer(timing)
        p1, p2 = pair
        pi = ch.Induced(p1, p2)
        fib = _cached_fibers(pi, H, tower, method)
        same = ch.iso_test(p1, p2)
        out = []
        for c1 in range(q - 1):
            for c2 in range(q - 1):
                m = fiber_multiplicity(fib, H, (c1, c2), tower)
                pred = predict_thm31(p1, p2, c1, c2, tower)
                inputs = {"q": q, "n": 2 * n, "theta": [ch.spec_str(p1), ch.spec_str(p2)],
                          "chi1": c1, "chi2": c2, "isomorphic_factors": same}
                rep = MultReport("prop3.1", inputs, m=m, predicted=pred, computed=m,
                                 passed=m == pred or same, wall_ms=t.ms())
                if m != pred:
                    rep.counterexamples.append({"factors": inputs["theta"], "chi": [c1, c2], "m": m,
                                                "predicted": pred})
                out.append(rep)
        return out

    res = VerifyResult("prop3.1", {"n": n, "q": q})
    for reps in _pmap(one, pairs, threads):
        res.reports.extend(reps)
        res.findings.extend(c for r in reps if r.inputs["isomorphic_factors"] for c in r.counterexamples)
    res.wall_ms = clock.ms()
    return res


# -- PGL_2 triple products ------------------------------------------------------------

def principal_series_params(q: int) -> list:
    """One exponent c per isomorphism class P(chi) = chi x chi^-1 with chi^2 != 1."""
    out = []
    for c in range(1, q - 1):
        if (2 * c) % (q - 1) and c <= (q - 1 - c) % (q - 1):
            out.append(c)
    return out


def cuspidal_pgl_params(q: int) -> list:
    """One k per D(chi), chi = k-th power of a generator of E^x/F^x (cyclic of order q+1), chi^2 != 1."""
    out = []
    for k in range(1, q + 1):
        if (2 * k) % (q + 1) and k <= (q + 1 - k) % (q + 1):
            out.append(k)
    return out


def pgl2_spec(kind: str, k: int, q: int) -> ch.CharSpec:
    if kind == "P":
        return ch.Induced(ch.GL1Char(q, k), ch.GL1Char(q, -k))
    return ch.Cuspidal(2, q, k * (q - 1))


def triple_exceptional(ks, modulus: int) -> bool:
    return any((s1 * ks[0] + s2 * ks[1] + s3 * ks[2]) % modulus == 0
               for s1 in (1, -1) for s2 in (1, -1) for s3 in (1, -1))


def pgl2_triple_multiplicity(s1, s2, s3, q: int, tower: FieldTower) -> int:
    """dim Hom_PGL2(s1 (x) s2, s3) for specs with trivial central character.

    Each PGL_2 class is the image of q-1 GL_2 classes' worth of elements, so the
    average over GL_2 equals the average over the quotient.
    """
    M = ch.working_conductor(tower)
    F = tower.field_of_size(q)
    order = mx.group_order(2, q)
    acc = Accumulator(M)
    for c in mx.enumerate_classes(2, F):
        v = ch.class_value(s1, c, tower, M) * ch.class_value(s2, c, tower, M) * ch.class_value(s3, c, tower, M).conj()
        acc.add(v, 0, mx.class_size(c))
    return acc.value().divide_exact(order).as_integer()


def verify_example25(q: int, include_repeats: bool = True, timing: bool = False, threads: int = 1) -> VerifyResult:
    """Triple products among principal series and among cuspidal PGL_2 representations.

    The rule is asserted on every triple, repeats included; a mismatch on a
    triple with repeats is also listed under findings.
    """
    from .fields import prime_power

    p, _ = prime_power(q)
    if p == 2 or q > 13:
        raise BoundExceeded("PGL_2 triple products need odd q <= 13")
    ch.require_green_validated()
    clock = _Timer(timing)
    tower = build_tower(q, [2])
    res = VerifyResult("ex2.5", {"q": q})
    import itertools

    for kind, params, modulus, special in (("P", principal_series_params(q), q - 1, 2),
                                           ("D", cuspidal_pgl_params(q), q + 1, 0)):
        triples = (itertools.combinations_with_replacement(params, 3) if include_repeats
                   else itertools.combinations(params, 3))
        for ks in triples:
            t = _Timer(timing)
            specs = [pgl2_spec(kind, k, q) for k in ks]
            m = pgl2_triple_multiplicity(*specs, q, tower)
            exc = triple_exceptional(ks, modulus)
            pred = special if exc else 1
            distinct = len(set(ks)) == 3
            rep = MultReport("ex2.5", {"q": q, "n": 2, "kind": kind, "theta": list(ks),
                                       "exceptional": exc, "distinct": distinct},
                             m=m, predicted=pred, computed=m, passed=m == pred, wall_ms=t.ms())
            if m != pred:
                rep.counterexamples.append({"kind": kind, "params": list(ks), "m": m, "predicted": pred})
                if not distinct:
                    res.findings.append(rep.counterexamples[-1])
            res.reports.append(rep)
    res.wall_ms = clock.ms()
    return res


# -- Whittaker-type projections onto characters of the unipotent radical -------------

class _RadicalData:
    """All X in M_n(F_q) with the additive data the projections need.

    psi_A(X) = zeta_p ** Tr(tr(A X)), Tr the absolute trace to F_p.
    """

    def __init__(self, n: int, F):
        from .cyclo import root_of_unity

        self.n, self.F = n, F
        Q, p = F.size, F.p
        elems = list(range(Q))
        self.mats = [tuple(tuple(flat[i * n:(i + 1) * n]) for i in range(n))
                     for flat in _product(elems, n * n)]
        self.tr_I = [F.trace_to_prime(_trace(F, X)) for X in self.mats]
        units = [A for A in self.mats if mx.rank(mx.MatF(F, A)) == n]
        self.full = []
        for X in self.mats:
            acc = CycValue(p)
            for A in units:
                acc = acc + root_of_unity(p, -F.trace_to_prime(_trace(F, _mul(F, A, X))))
            self.full.append(acc.as_integer())
        self.everything = [Q ** (n * n) if not any(any(r) for r in X) else 0 for X in self.mats]


def _product(elems, k):
    import itertools

    return itertools.product(elems, repeat=k)


def _mul(F, A, B) -> tuple:
    return (mx.MatF(F, A) @ mx.MatF(F, B)).rows


def _trace(F, X) -> int:
    t = 0
    for i in range(len(X)):
        t = F.add(t, X[i][i])
    return t


_radical_cache: dict = {}


def _radical(n: int, F) -> _RadicalData:
    key = (n, id(F))
    r = _radical_cache.get(key)
    if r is None:
        r = _radical_cache[key] = _RadicalData(n, F)
    return r


def _levi_times_unipotent(F, g1, g2, X) -> mx.MatF:
    """diag(g1, g2) times the block unipotent [[1, X], [0, 1]]."""
    n = len(g1)
    top = _mul(F, g1, X)
    rows = [list(g1[i]) + list(top[i]) for i in range(n)]
    rows += [[0] * n + list(g2[i]) for i in range(n)]
    return mx.MatF(F, rows)


_uclass_cache: dict = {}


def _unipotent_classes(F, c1, c2, n):
    """Ambient class of rep(c1, c2) * u(X) for every X, in radical order."""
    key = (id(F), c1, c2)
    out = _uclass_cache.get(key)
    if out is None:
        g1 = mx.representative(c1, F).rows
        g2 = mx.representative(c2, F).rows
        out = [mx.class_of(_levi_times_unipotent(F, g1, g2, X)) for X in _radical(n, F).mats]
        _uclass_cache[key] = out
    return out


def ndeg_char_value(pi: ch.CharSpec, c1: mx.ClassData, c2: mx.ClassData, tower: FieldTower,
                    part: str = "nondegenerate") -> CycValue:
    """Character of the sum of psi_A-isotypic parts of pi, A of full rank (or of lower rank), at rep(c1, c2)."""
    n = c1.n
    F = tower.field_of_size(c1.q)
    R = _radical(n, F)
    M = ch.working_conductor(tower)
    weights = R.full if part == "nondegenerate" else [e - f for e, f in zip(R.everything, R.full)]
    acc = Accumulator(M)
    for c, w in zip(_unipotent_classes(F, c1, c2, n), weights):
        if w:
            acc.add(ch.class_value(pi, c, tower, M), 0, w)
    return acc.value().divide_exact(len(R.mats))


def psi_identity_char_value(pi: ch.CharSpec, c: mx.ClassData, tower: FieldTower) -> CycValue:
    """Character of the psi_I-isotypic part of pi at the diagonal element (g, g), g in class c."""
    n = c.n
    F = tower.field_of_size(c.q)
    R = _radical(n, F)
    M = ch.working_conductor(tower)
    acc = Accumulator(M * F.p)
    for cls, e in zip(_unipotent_classes(F, c, c, n), R.tr_I):
        acc.add(ch.class_value(pi, cls, tower, M), -e * M)
    return acc.value().divide_exact(len(R.mats))


def _torus_data(tower: FieldTower, n: int, q: int):
    """[(class in GL_n(F_q) of multiplication by t, dlog of t in the top field)] over t in F_{q^n}^x."""
    K, F = tower.field_of_size(q ** n), tower.field_of_size(q)
    out = []
    for j in range(K.order):
        t = K.pow(K.gen, j)
        L_top = tower.dlog(tower.embed(t, K.d, tower.D), tower.D)
        out.append((mx.class_of(mx.mult_matrix(tower, t, K, F)), L_top))
    return out


def torus_induced_value(a: int, two_n: int, q: int, classes, tower: FieldTower) -> CycValue:
    """Induced character from the (diagonal) torus F_{q^n}^x of theta|, at a class of GL_n or GL_n x GL_n.

    ``classes`` is (c,) for GL_n or (c1, c2) for the Levi; t contributes when it lies in every c_i.
    """
    n = two_n // 2
    M = ch.working_conductor(tower)
    cent = 1
    for c in classes:
        cent *= mx.centralizer_order(c)
    acc = Accumulator(M)
    data = _torus_data(tower, n, q)
    for cls, L in data:
        if all(cls == c for c in classes):
            acc.add(CycValue.root(M, ch._exponent_value(tower, a, q ** two_n, L, M)), 0, cent)
    return acc.value().divide_exact(len(data))


def _identity_check(verifier: str, n: int, q: int, timing: bool, threads: int, body) -> VerifyResult:
    if n > 2 or q ** (2 * n) > 81:
        raise BoundExceeded("the radical sums are limited to q^(n*n) <= 81")
    ch.require_green_validated()
    clock = _Timer(timing)
    tower = build_tower(q, [2 * n])
    res = VerifyResult(verifier, {"n": n, "q": q})
    for reps in _pmap(lambda a: body(a, tower), _orbit_reps(2 * n, q), threads):
        res.reports.extend(reps)
    res.wall_ms = clock.ms()
    return res


def verify_thm42(n: int, q: int, timing: bool = False, threads: int = 1) -> VerifyResult:
    """psi_I-part of cuspidal pi of GL_2n versus induction from F_{q^n}^x to the diagonal GL_n."""
    def body(a, tower):
        pi = ch.Cuspidal(2 * n, q, a)
        F = tower.field_of_size(q)
        M = ch.working_conductor(tower)
        out = []
        for c in mx.enumerate_classes(n, F):
            lhs = psi_identity_char_value(pi, c, tower)
            rhs = torus_induced_value(a, 2 * n, q, (c,), tower).lift(M * F.p)
            ok = lhs == rhs
            rep = MultReport("thm4.2", {"q": q, "n": 2 * n, "theta": a, "class": c.key()},
                             predicted=_cyc_cell(rhs), computed=_cyc_cell(lhs), passed=ok)
            if not ok:
                rep.counterexamples.append({"theta": a, "class": c.key()})
            out.append(rep)
        return out

    return _identity_check("thm4.2", n, q, timing, threads, body)


def verify_cor43(n: int, q: int, timing: bool = False, threads: int = 1) -> VerifyResult:
    """Non-degenerate part on the Levi versus induction from the diagonal torus; the degenerate
    part must contain no character chi_1(det) x chi_2(det) of the Levi."""
    def body(a, tower):
        pi = ch.Cuspidal(2 * n, q, a)
        F = tower.field_of_size(q)
        M = ch.working_conductor(tower)
        out = []
        classes = list(mx.enumerate_classes(n, F))
        deg_fibers: dict = {}
        for c1 in classes:
            for c2 in classes:
                lhs = ndeg_char_value(pi, c1, c2, tower)
                rhs = torus_induced_value(a, 2 * n, q, (c1, c2), tower)
                ok = lhs == rhs
                rep = MultReport("cor4.3", {"q": q, "n": 2 * n, "theta": a, "class": [c1.key(), c2.key()]},
                                 predicted=_cyc_cell(rhs), computed=_cyc_cell(lhs), passed=ok)
                if not ok:
                    rep.counterexamples.append({"theta": a, "class": [c1.key(), c2.key()]})
                out.append(rep)
                key = (_native_log(c1, tower), _native_log(c2, tower))
                acc = deg_fibers.setdefault(key, Accumulator(M))
                acc.add(ndeg_char_value(pi, c1, c2, tower, "degenerate"), 0,
                        mx.class_size(c1) * mx.class_size(c2))
        fib = {k: v.value() for k, v in sorted(deg_fibers.items())}
        L = LeviNN(n, q)
        ms = {(c1, c2): fiber_multiplicity(fib, L, (c1, c2), tower) for c1 in range(q - 1) for c2 in range(q - 1)}
        bad = [list(k) for k, m in ms.items() if m]
        rep = MultReport("cor4.3", {"q": q, "n": 2 * n, "theta": a, "part": "degenerate"},
                         predicted=0, computed=max(ms.values()), passed=not bad, counterexamples=bad)
        out.append(rep)
        return out

    return _identity_check("cor4.3", n, q, timing, threads, body)
