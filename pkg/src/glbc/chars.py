"""Representation specs for GL_n over a tower level and their exact characters.

A spec is symbolic parametrizing data: a cuspidal representation given by a
regular character exponent, a one-dimensional character chi(det), a
representation parabolically induced from two factors, or a row of a
brute-force character table. Values are :class:`CycValue` at a working
conductor, which defaults to the order of the top multiplicative group of
the tower (every q^d - 1 of the tower divides it).
"""
from __future__ import annotations

import itertools
import json
import os
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Union

from . import matrices as mx
from . import polys
from .cyclo import Accumulator, CycValue
from .errors import (
    GreenFormulaNotValidated,
    IncomparableSpecs,
    LevelMismatch,
    NotRegular,
)
from .fields import FieldTower, build_tower, is_regular

GREEN_FORMULA_VERSION = 1


# -- specs --------------------------------------------------------------------

@dataclass(frozen=True)
class Cuspidal:
    """Cuspidal representation of GL_n(F_q) attached to a regular character of F_{q^n}^x."""

    n: int
    q: int
    theta: int

    def __post_init__(self):
        N = self.q ** self.n - 1
        object.__setattr__(self, "theta", self.theta % N)
        if self.n > 1 and not is_regular_exponent(self.theta, self.n, self.q):
            raise NotRegular(f"exponent {self.theta} is not regular for GL_{self.n}(F_{self.q})")

    def to_json(self) -> dict:
        return {"kind": "cuspidal", "n": self.n, "q": self.q, "theta": self.theta}


@dataclass(frozen=True)
class GL1Char:
    q: int
    chi: int

    def __post_init__(self):
        object.__setattr__(self, "chi", self.chi % (self.q - 1))

    @property
    def n(self) -> int:
        return 1

    def to_json(self) -> dict:
        return {"kind": "gl1", "q": self.q, "chi": self.chi}


@dataclass(frozen=True)
class DetChar:
    n: int
    q: int
    chi: int

    def __post_init__(self):
        object.__setattr__(self, "chi", self.chi % (self.q - 1))

    def to_json(self) -> dict:
        return {"kind": "det", "n": self.n, "q": self.q, "chi": self.chi}


@dataclass(frozen=True)
class Induced:
    """Parabolic induction: left acts on the invariant subspace, right on the quotient."""

    left: "CharSpec"
    right: "CharSpec"

    def __post_init__(self):
        if self.left.q != self.right.q:
            raise LevelMismatch("induced factors over different levels")

    @property
    def n(self) -> int:
        return self.left.n + self.right.n

    @property
    def q(self) -> int:
        return self.left.q

    def to_json(self) -> dict:
        return {"kind": "induced", "left": self.left.to_json(), "right": self.right.to_json()}


@dataclass(frozen=True)
class OracleChar:
    table: str
    row: int

    @property
    def n(self) -> int:
        return int(self.table.split(":")[1])

    @property
    def q(self) -> int:
        return int(self.table.split(":")[2])

    def to_json(self) -> dict:
        return {"kind": "oracle", "table": self.table, "row": self.row}


CharSpec = Union[Cuspidal, GL1Char, DetChar, Induced, OracleChar]


def is_regular_exponent(a: int, n: int, Q: int) -> bool:
    from .fields import MultChar

    return is_regular(MultChar(Q ** n, a), n, Q)


def spec_from_json(d) -> CharSpec:
    if isinstance(d, str):
        d = json.loads(d)
    kind = d["kind"]
    if kind == "cuspidal":
        return Cuspidal(d["n"], d["q"], d["theta"])
    if kind == "gl1":
        return GL1Char(d["q"], d["chi"])
    if kind == "det":
        return DetChar(d["n"], d["q"], d["chi"])
    if kind == "induced":
        return Induced(spec_from_json(d["left"]), spec_from_json(d["right"]))
    if kind == "oracle":
        return OracleChar(d["table"], d["row"])
    raise ValueError(f"unknown spec kind {kind!r}")


def parse_spec(s: str) -> CharSpec:
    """Compact CLI form: cuspidal:n:q:a, det:n:q:c, gl1:q:c, induced(A,B), or JSON."""
    s = s.strip()
    if s.startswith("{"):
        return spec_from_json(s)
    if s.startswith("induced(") and s.endswith(")"):
        inner = s[len("induced("):-1]
        depth = 0
        for i, ch in enumerate(inner):
            if ch == "(":
                depth += 1
            elif ch == ")":
                depth -= 1
            elif ch == "," and depth == 0:
                return Induced(parse_spec(inner[:i]), parse_spec(inner[i + 1:]))
        raise ValueError(f"cannot split induced spec {s!r}")
    parts = s.split(":")
    kind = parts[0]
    nums = [int(x) for x in parts[1:]]
    if kind == "cuspidal":
        return Cuspidal(*nums)
    if kind == "det":
        return DetChar(*nums)
    if kind == "gl1":
        return GL1Char(*nums)
    if kind == "oracle":
        return OracleChar(":".join(parts[1:-1]), int(parts[-1]))
    raise ValueError(f"cannot parse spec {s!r}")


def spec_str(s: CharSpec) -> str:
    if isinstance(s, Cuspidal):
        return f"cuspidal:{s.n}:{s.q}:{s.theta}"
    if isinstance(s, DetChar):
        return f"det:{s.n}:{s.q}:{s.chi}"
    if isinstance(s, GL1Char):
        return f"gl1:{s.q}:{s.chi}"
    if isinstance(s, Induced):
        return f"induced({spec_str(s.left)},{spec_str(s.right)})"
    return f"oracle:{s.table}:{s.row}"


# -- towers and conductors ----------------------------------------------------

def tower_for(*specs: CharSpec, base: int | None = None) -> FieldTower:
    """A tower over ``base`` (default: smallest level) containing every level the specs need."""
    sizes = []
    for s in specs:
        sizes.extend(_needed_sizes(s))
    if base is None:
        base = min(s.q for s in specs)
    degs = [_log_exact(Q, base) for Q in sizes]
    return build_tower(base, degs)


def _needed_sizes(s: CharSpec) -> list:
    if isinstance(s, Induced):
        return _needed_sizes(s.left) + _needed_sizes(s.right)
    if isinstance(s, Cuspidal):
        return [s.q ** s.n]
    return [s.q]


def _log_exact(Q: int, base: int) -> int:
    k, x = 0, 1
    while x < Q:
        x *= base
        k += 1
    if x != Q:
        raise LevelMismatch(f"F_{Q} is not an extension of F_{base}")
    return k


def working_conductor(tower: FieldTower) -> int:
    return tower.field(tower.D).order


# -- root data for Green's formula --------------------------------------------

_root_cache: dict = {}
_cache_lock = threading.Lock()


def root_dlog(tower: FieldTower, Q: int, f) -> int:
    """Discrete log, in the top field of the tower, of the least-dlog root of f."""
    key = (id(tower), Q, f)
    v = _root_cache.get(key)
    if v is not None:
        return v
    F = tower.field_of_size(Q)
    top = tower.field(tower.D)
    emb = tower.embed_table(F.d, tower.D)
    fe = [emb[c] for c in f]
    d = len(f) - 1
    Qd = Q ** d
    if (top.order) % (Qd - 1):
        raise LevelMismatch(f"F_{Qd} is not in the tower")
    step = top.order // (Qd - 1)
    for j in range(Qd - 1):
        x = top.exp[j * step]
        if polys.evaluate(top, fe, x) == 0:
            v = j * step
            break
    else:
        raise AssertionError(f"no root of {f} in F_{Qd}")
    with _cache_lock:
        _root_cache[key] = v
    return v


def _exponent_value(tower: FieldTower, a: int, level_size: int, L_top: int, m: int) -> int:
    """Exponent e with theta(x) = zeta_m^e, theta of exponent a at level_size, x = gen_top^L_top."""
    top_order = tower.field(tower.D).order
    N = level_size - 1
    ratio = top_order // N
    if L_top % ratio:
        raise LevelMismatch("element does not lie in the character's level")
    if m % N:
        raise LevelMismatch(f"conductor {m} is not a multiple of {N}")
    return (a * (L_top // ratio) * (m // N)) % m


# -- character values ---------------------------------------------------------

def cuspidal_char_value(spec: Cuspidal, c: mx.ClassData, tower: FieldTower, m: int | None = None) -> CycValue:
    m = m or working_conductor(tower)
    Q, n = spec.q, spec.n
    if c.q != Q or c.n != n:
        raise LevelMismatch(f"class {c.key()} does not match GL_{n}(F_{Q})")
    if len(c.pairs) != 1:
        return CycValue(m)
    f, lam = c.pairs[0]
    d = len(f) - 1
    if n % d or sum(lam) * d != n:
        return CycValue(m)
    L = root_dlog(tower, Q, f)
    top_order = tower.field(tower.D).order
    acc = CycValue(m)
    for k in range(d):
        Lk = (L * Q ** k) % top_order
        acc = acc + CycValue.root(m, _exponent_value(tower, spec.theta, Q ** n, Lk, m))
    factor = (-1) ** (n - 1)
    for i in range(1, len(lam)):
        factor *= 1 - Q ** (d * i)
    return acc * factor


def det_char_value(spec, c: mx.ClassData, tower: FieldTower, m: int | None = None) -> CycValue:
    m = m or working_conductor(tower)
    if c.q != spec.q or c.n != spec.n:
        raise LevelMismatch(f"class {c.key()} does not match the character level")
    F = tower.field_of_size(spec.q)
    dt = mx.class_det(c, F)
    L_top = tower.dlog(tower.embed(dt, F.d, tower.D), tower.D)
    return CycValue.root(m, _exponent_value(tower, spec.chi, spec.q, L_top, m))


_hall_cache: dict = {}


def hall_table(lam: tuple, Qd: int) -> dict:
    """{(mu, nu): number of submodules of type mu and cotype nu} in a module of type lam.

    Counted by enumerating the subspaces stable under a unipotent Jordan matrix of
    type lam over a field of size Qd; depends only on (lam, Qd).
    """
    key = (lam, Qd)
    tab = _hall_cache.get(key)
    if tab is not None:
        return tab
    if len(lam) == 1:
        k = lam[0]
        tab = {(tuple([j] if j else []), tuple([k - j] if k - j else [])): 1 for j in range(k + 1)}
        with _cache_lock:
            _hall_cache[key] = tab
        return tab
    K = build_tower(Qd, [1]).field(1)
    J = mx.representative(mx.ClassData(Qd, sum(lam), (((K.neg(1), 1), lam),)), K)
    n = J.n
    tab = {}
    for k in range(n + 1):
        for W in mx.invariant_subspaces(J, k):
            AW, AQ = mx.restrict_and_quotient(J, W)
            mu = _unipotent_type(AW)
            nu = _unipotent_type(AQ)
            tab[(mu, nu)] = tab.get((mu, nu), 0) + 1
    with _cache_lock:
        _hall_cache[key] = tab
    return tab


def _unipotent_type(A: mx.MatF) -> tuple:
    if A.n == 0:
        return ()
    c = mx.class_of(A)
    return c.pairs[0][1]


def induced_class_value(spec: Induced, c: mx.ClassData, tower: FieldTower, m: int | None = None) -> CycValue:
    """Induced character at a class via submodule counts of each primary component."""
    m = m or working_conductor(tower)
    n1 = spec.left.n
    Q = spec.q
    if c.q != Q or c.n != spec.n:
        raise LevelMismatch(f"class {c.key()} does not match the character level")
    options = []
    for f, lam in c.pairs:
        d = len(f) - 1
        tab = hall_table(lam, Q ** d)
        options.append([(f, d, mu, nu, cnt) for (mu, nu), cnt in tab.items()])
    acc = Accumulator(m)
    for choice in itertools.product(*options):
        if sum(d * sum(mu) for _, d, mu, _, _ in choice) != n1:
            continue
        cnt = 1
        for *_, k in choice:
            cnt *= k
        left = mx.ClassData(Q, n1, tuple((f, mu) for f, _, mu, _, _ in choice if mu))
        right = mx.ClassData(Q, c.n - n1, tuple((f, nu) for f, _, _, nu, _ in choice if nu))
        v = class_value(spec.left, left, tower, m) * class_value(spec.right, right, tower, m)
        acc.add(v, 0, cnt)
    return acc.value()


def induced_char_value(spec: Induced, g: mx.MatF, tower: FieldTower, m: int | None = None) -> CycValue:
    """Induced character at a matrix: sum over g-stable subspaces W of the factor values."""
    m = m or working_conductor(tower)
    if g.field.size != spec.q or g.n != spec.n:
        raise LevelMismatch("matrix does not match the character level")
    acc = Accumulator(m)
    for W in mx.invariant_subspaces(g, spec.left.n):
        AW, AQ = mx.restrict_and_quotient(g, W)
        v = char_value(spec.left, AW, tower, m) * char_value(spec.right, AQ, tower, m)
        acc.add(v)
    return acc.value()


_value_cache: dict = {}


def class_value(spec: CharSpec, c: mx.ClassData, tower: FieldTower, m: int | None = None) -> CycValue:
    m = m or working_conductor(tower)
    key = (spec, c, id(tower), m)
    v = _value_cache.get(key)
    if v is not None:
        return v
    if isinstance(spec, Cuspidal):
        if spec.n == 1:
            v = det_char_value(DetChar(1, spec.q, spec.theta), c, tower, m)
        else:
            v = cuspidal_char_value(spec, c, tower, m)
    elif isinstance(spec, (DetChar, GL1Char)):
        v = det_char_value(spec, c, tower, m)
    elif isinstance(spec, Induced):
        v = induced_class_value(spec, c, tower, m)
    elif isinstance(spec, OracleChar):
        from . import oracle

        v = oracle.oracle_class_value(spec, c, tower, m)
    else:
        raise TypeError(f"unknown spec {spec!r}")
    v.reduce()
    with _cache_lock:
        _value_cache[key] = v
    return v


def char_value(spec: CharSpec, x, tower: FieldTower, m: int | None = None, method: str = "class") -> CycValue:
    """Dispatch on ClassData or MatF; induced specs at a matrix use subspaces when method='geometric'."""
    if isinstance(x, mx.MatF):
        if isinstance(spec, Induced) and method == "geometric":
            return induced_char_value(spec, x, tower, m)
        x = mx.class_of(x)
    elif isinstance(spec, Induced) and method == "geometric":
        F = tower.field_of_size(x.q)
        return induced_char_value(spec, mx.representative(x, F), tower, m)
    return class_value(spec, x, tower, m)


def clear_caches():
    with _cache_lock:
        _value_cache.clear()
        _root_cache.clear()


# -- spec operations ----------------------------------------------------------

def dim_of(spec: CharSpec) -> int:
    if isinstance(spec, Cuspidal):
        out = 1
        for i in range(1, spec.n):
            out *= spec.q ** i - 1
        return out
    if isinstance(spec, (DetChar, GL1Char)):
        return 1
    if isinstance(spec, Induced):
        return mx.gaussian_binomial(spec.n, spec.left.n, spec.q) * dim_of(spec.left) * dim_of(spec.right)
    from . import oracle

    return oracle.get_table(spec.table).degrees[spec.row]


def dual_spec(s: CharSpec) -> CharSpec:
    if isinstance(s, Cuspidal):
        return Cuspidal(s.n, s.q, -s.theta)
    if isinstance(s, DetChar):
        return DetChar(s.n, s.q, -s.chi)
    if isinstance(s, GL1Char):
        return GL1Char(s.q, -s.chi)
    if isinstance(s, Induced):
        return Induced(dual_spec(s.left), dual_spec(s.right))
    raise IncomparableSpecs("oracle rows have no symbolic dual")


def twist_spec(s: CharSpec, chi: int) -> CharSpec:
    """Tensor with chi(det), chi an exponent for the level field of s."""
    if isinstance(s, Cuspidal):
        N = s.q ** s.n - 1
        return Cuspidal(s.n, s.q, s.theta + chi * (N // (s.q - 1)))
    if isinstance(s, DetChar):
        return DetChar(s.n, s.q, s.chi + chi)
    if isinstance(s, GL1Char):
        return GL1Char(s.q, s.chi + chi)
    if isinstance(s, Induced):
        return Induced(twist_spec(s.left, chi), twist_spec(s.right, chi))
    raise IncomparableSpecs("oracle rows have no symbolic twist")


def frobenius_spec(s: CharSpec, sub_size: int) -> CharSpec:
    """Character g -> Theta(sigma(g)), sigma raising entries to the power sub_size."""
    if isinstance(s, Cuspidal):
        return Cuspidal(s.n, s.q, s.theta * sub_size)
    if isinstance(s, DetChar):
        return DetChar(s.n, s.q, s.chi * sub_size)
    if isinstance(s, GL1Char):
        return GL1Char(s.q, s.chi * sub_size)
    if isinstance(s, Induced):
        return Induced(frobenius_spec(s.left, sub_size), frobenius_spec(s.right, sub_size))
    raise IncomparableSpecs("oracle rows have no symbolic Frobenius")


def _as_one_dim(s):
    if isinstance(s, GL1Char):
        return ("1d", 1, s.q, s.chi)
    if isinstance(s, DetChar):
        return ("1d", s.n, s.q, s.chi)
    if isinstance(s, Cuspidal) and s.n == 1:
        return ("1d", 1, s.q, s.theta)
    return None


def iso_test(s1: CharSpec, s2: CharSpec) -> bool:
    if s1.n != s2.n or s1.q != s2.q:
        raise IncomparableSpecs("specs for different groups")
    o1, o2 = _as_one_dim(s1), _as_one_dim(s2)
    if o1 is not None and o2 is not None:
        return o1 == o2
    if isinstance(s1, Cuspidal) and isinstance(s2, Cuspidal):
        N = s1.q ** s1.n - 1
        return any((s1.theta * s1.q ** k) % N == s2.theta for k in range(s1.n))
    if isinstance(s1, Induced) and isinstance(s2, Induced):
        def same(a, b):
            try:
                return a.n == b.n and iso_test(a, b)
            except IncomparableSpecs:
                return False

        return (same(s1.left, s2.left) and same(s1.right, s2.right)) or (
            same(s1.left, s2.right) and same(s1.right, s2.left)
        )
    raise IncomparableSpecs(f"cannot compare {type(s1).__name__} with {type(s2).__name__}")


def basechange_spec(s: CharSpec) -> CharSpec:
    """Basechange to the quadratic extension of its level."""
    q = s.q
    E = q * q
    if isinstance(s, Cuspidal):
        if s.n == 1:
            return GL1Char(E, s.theta * (q + 1))
        if s.n % 2 == 0:
            h = s.n // 2
            return Induced(Cuspidal(h, E, s.theta), Cuspidal(h, E, s.theta * q))
        N = s.n
        return Cuspidal(N, E, s.theta * (q ** N + 1))
    if isinstance(s, DetChar):
        return DetChar(s.n, E, s.chi * (q + 1))
    if isinstance(s, GL1Char):
        return GL1Char(E, s.chi * (q + 1))
    if isinstance(s, Induced):
        left, right = basechange_spec(s.left), basechange_spec(s.right)
        if isinstance(left, Induced) or isinstance(right, Induced):
            raise NotRegular("basechange of this induced spec needs more than two factors")
        return Induced(left, right)
    raise IncomparableSpecs("oracle rows have no symbolic basechange")


# -- inner products -----------------------------------------------------------

def class_inner_product(s1: CharSpec, s2: CharSpec, tower: FieldTower, m: int | None = None) -> int:
    """<Theta_1, Theta_2> over GL_n(F_Q) as a class-indexed sum."""
    m = m or working_conductor(tower)
    if s1.n != s2.n or s1.q != s2.q:
        raise IncomparableSpecs("specs for different groups")
    F = tower.field_of_size(s1.q)
    order = mx.group_order(s1.n, s1.q)
    acc = Accumulator(m)
    for c in mx.enumerate_classes(s1.n, F):
        v = class_value(s1, c, tower, m) * class_value(s2, c, tower, m).conj()
        acc.add(v, 0, order // mx.centralizer_order(c))
    return acc.value().divide_exact(order).as_integer()


# -- Green formula gate ---------------------------------------------------------

_green_state = {"validated": False}


def cache_dir() -> Path:
    return Path(os.environ.get("GLBC_CACHE_DIR") or Path.home() / ".cache" / "glbc")


def _gate_file() -> Path:
    return cache_dir() / "green_validation.json"


def mark_green_validated(groups: list, persist: bool = True):
    _green_state["validated"] = True
    if not persist:
        return
    payload = {
        "formula_version": GREEN_FORMULA_VERSION,
        "groups": [
            {"n": n, "q": q, "tower": build_tower(q, [n]).descriptor_hash()}
            for n, q in groups
        ],
    }
    try:
        cache_dir().mkdir(parents=True, exist_ok=True)
        _gate_file().write_text(json.dumps(payload, indent=1, sort_keys=True))
    except OSError:
        pass


def green_validated() -> bool:
    if _green_state["validated"]:
        return True
    try:
        payload = json.loads(_gate_file().read_text())
    except (OSError, ValueError):
        return False
    if payload.get("formula_version") != GREEN_FORMULA_VERSION:
        return False
    for g in payload.get("groups", []):
        if build_tower(g["q"], [g["n"]]).descriptor_hash() != g["tower"]:
            return False
    if not payload.get("groups"):
        return False
    _green_state["validated"] = True
    return True


def reset_green_gate():
    _green_state["validated"] = False


def require_green_validated():
    if not green_validated():
        raise GreenFormulaNotValidated(
            "cuspidal character formula has not been checked against the brute-force "
            "character tables; run `glbc oracle --validate` first"
        )
