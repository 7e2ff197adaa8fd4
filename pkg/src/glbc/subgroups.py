"""Subgroups H embedded in an ambient GL_N, iterated elementwise or by classes.

Both iterators yield weighted triples (ambient ClassData, native ClassData per
factor, weight) whose weights sum to |H|. Multiplicities only ever need these.
"""
from __future__ import annotations

import itertools
import threading
from collections import Counter

from . import matrices as mx
from .errors import BoundExceeded
from .fields import FieldTower

ELEMENT_BOUND = 200_000


class EmbeddedSubgroup:
    """Product of native groups GL_{n_i}(F_{Q_i}) mapped into GL_N(F_Q)."""

    kind = "subgroup"

    def __init__(self, factors, ambient):
        self.factors = tuple(factors)
        self.ambient = ambient

    @property
    def order(self) -> int:
        out = 1
        for n, Q in self.factors:
            out *= mx.group_order(n, Q)
        return out

    def label(self) -> str:
        fs = "x".join(f"GL{n}(F{Q})" for n, Q in self.factors)
        N, Q = self.ambient
        return f"{self.kind}:{fs}->GL{N}(F{Q})"

    def to_json(self) -> dict:
        return {"kind": self.kind, "factors": [list(f) for f in self.factors], "ambient": list(self.ambient)}

    def __eq__(self, other):
        return type(self) is type(other) and self.factors == other.factors and self.ambient == other.ambient

    def __hash__(self):
        return hash((type(self).__name__, self.factors, self.ambient))

    def embed(self, mats, tower: FieldTower) -> mx.MatF:
        raise NotImplementedError

    def ambient_class(self, classes, tower: FieldTower) -> mx.ClassData:
        """Class of the image of an element with the given native classes."""
        reps = [mx.representative(c, tower.field_of_size(Q)) for c, (_, Q) in zip(classes, self.factors)]
        return mx.class_of(self.embed(reps, tower))

    def element_data(self, tower: FieldTower, bound: int | None = None) -> list:
        key = (self, id(tower))
        data = _element_cache.get(key)
        if data is not None:
            return data
        bound = ELEMENT_BOUND if bound is None else bound
        if self.order > bound:
            raise BoundExceeded(f"|H| = {self.order} exceeds the element bound {bound}; use the classwise path")
        per_factor = []
        for n, Q in self.factors:
            F = tower.field_of_size(Q)
            per_factor.append([(g, mx.class_of(g)) for g in mx.enumerate_group(n, F, bound)])
        counts = Counter()
        for combo in itertools.product(*per_factor):
            amb = mx.class_of(self.embed([g for g, _ in combo], tower))
            counts[(amb, tuple(c for _, c in combo))] += 1
        data = sorted(((a, nat, w) for (a, nat), w in counts.items()), key=_data_key)
        with _lock:
            _element_cache[key] = data
        return data

    def class_data(self, tower: FieldTower) -> list:
        key = (self, id(tower))
        data = _class_cache.get(key)
        if data is not None:
            return data
        per_factor = [list(mx.enumerate_classes(n, tower.field_of_size(Q))) for n, Q in self.factors]
        out = []
        for combo in itertools.product(*per_factor):
            w = 1
            for c in combo:
                w *= mx.class_size(c)
            out.append((self.ambient_class(combo, tower), tuple(combo), w))
        out.sort(key=_data_key)
        with _lock:
            _class_cache[key] = out
        return out

    def data(self, tower: FieldTower, method: str) -> list:
        if method == "elementwise":
            return self.element_data(tower)
        if method == "classwise":
            return self.class_data(tower)
        raise ValueError(f"unknown method {method!r}")


def _data_key(item):
    amb, nat, _ = item
    return (amb.key(), tuple(c.key() for c in nat))


_element_cache: dict = {}
_class_cache: dict = {}
_lock = threading.Lock()


class BlockLevi(EmbeddedSubgroup):
    """Block-diagonal GL_{n_1} x ... x GL_{n_k} in GL_{sum n_i}, all over F_Q."""

    kind = "levi"

    def __init__(self, sizes, Q: int):
        super().__init__([(n, Q) for n in sizes], (sum(sizes), Q))

    def embed(self, mats, tower):
        return mx.block_diag(*mats)

    def ambient_class(self, classes, tower):
        out = classes[0]
        for c in classes[1:]:
            out = mx.merge_classes(out, c)
        return out


def LeviNN(n: int, Q: int) -> BlockLevi:
    return BlockLevi((n, n), Q)


def SplitTorus(k: int, Q: int) -> BlockLevi:
    return BlockLevi((1,) * k, Q)


class WeilGLnE(EmbeddedSubgroup):
    """GL_n(F_{q^2}) inside GL_{2n}(F_q) by restriction of scalars."""

    kind = "weil"

    def __init__(self, n: int, q: int):
        super().__init__([(n, q * q)], (2 * n, q))
        self.q = q

    def embed(self, mats, tower):
        return mx.weil_embed(mats[0], tower, tower.field_of_size(self.q))


class SubfieldGLn(EmbeddedSubgroup):
    """GL_n(F_q) inside GL_n(F_{q^2})."""

    kind = "subfield"

    def __init__(self, n: int, q: int):
        super().__init__([(n, q)], (n, q * q))
        self.q = q

    def embed(self, mats, tower):
        return mx.subfield_embed(mats[0], tower, tower.field_of_size(self.q * self.q))

    def ambient_class(self, classes, tower):
        return mx.basechange_class(classes[0], tower, tower.field_of_size(self.q * self.q))


class WholeGroup(EmbeddedSubgroup):
    kind = "whole"

    def __init__(self, n: int, Q: int):
        super().__init__([(n, Q)], (n, Q))

    def embed(self, mats, tower):
        return mats[0]

    def ambient_class(self, classes, tower):
        return classes[0]


def subgroup_from_name(name: str, n: int, q: int) -> EmbeddedSubgroup:
    """CLI selector: ``levi`` and ``weil`` live in GL_{2n}(F_q); n is the half size."""
    if name == "levi":
        return LeviNN(n, q)
    if name == "weil":
        return WeilGLnE(n, q)
    if name == "torus":
        return SplitTorus(2 * n, q)
    if name == "subfield":
        return SubfieldGLn(n, q)
    if name == "whole":
        return WholeGroup(n, q)
    raise ValueError(f"unknown subgroup {name!r}")
