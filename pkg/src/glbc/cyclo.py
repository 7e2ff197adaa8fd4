"""Exact arithmetic in the cyclotomic integers Z[zeta_m].

A :class:`CycValue` stores an unreduced sparse coefficient map ``{e: c}``
meaning ``sum c * zeta_m**e``. Equality, hashing and integer extraction go
through :meth:`CycValue.reduce`, which divides by the m-th cyclotomic
polynomial.
"""
from __future__ import annotations

import cmath
from functools import lru_cache
from math import gcd

from .errors import BoundExceeded, ConductorMismatch, NotDivisible, NotRational

CONDUCTOR_BOUND = 10_000


def _poly_divexact(num, den):
    """Exact division of integer polynomials (low-to-high), den monic."""
    num = list(num)
    dd = len(den) - 1
    out = [0] * (len(num) - dd)
    for i in range(len(num) - 1, dd - 1, -1):
        c = num[i]
        if c:
            out[i - dd] = c
            for j in range(dd + 1):
                num[i - dd + j] -= c * den[j]
    if any(num[:dd]):
        raise ArithmeticError("inexact polynomial division")
    return out


@lru_cache(maxsize=None)
def cyclotomic_poly(m: int) -> tuple:
    """Coefficients (low to high) of the m-th cyclotomic polynomial."""
    if m < 1:
        raise ValueError("conductor must be positive")
    if m > CONDUCTOR_BOUND:
        raise BoundExceeded(f"conductor {m} above {CONDUCTOR_BOUND}")
    poly = [-1] + [0] * (m - 1) + [1]
    for d in range(1, m):
        if m % d == 0:
            poly = _poly_divexact(poly, cyclotomic_poly(d))
    return tuple(poly)


def euler_phi(m: int) -> int:
    return sum(1 for k in range(1, m + 1) if gcd(k, m) == 1)


class CycValue:
    __slots__ = ("m", "coeffs", "_reduced")

    def __init__(self, m: int, coeffs=None):
        if m < 1:
            raise ValueError("conductor must be positive")
        self.m = m
        c = {}
        if coeffs:
            items = coeffs.items() if isinstance(coeffs, dict) else coeffs
            for e, v in items:
                if v:
                    e %= m
                    s = c.get(e, 0) + v
                    if s:
                        c[e] = s
                    else:
                        c.pop(e, None)
        self.coeffs = c
        self._reduced = None

    # construction -----------------------------------------------------
    @classmethod
    def integer(cls, k: int, m: int = 1) -> CycValue:
        return cls(m, {0: k})

    @classmethod
    def root(cls, m: int, e: int) -> CycValue:
        return cls(m, {e: 1})

    def lift(self, M: int) -> CycValue:
        """Re-express over a multiple M of the conductor."""
        if M % self.m:
            raise ConductorMismatch(f"cannot lift conductor {self.m} to {M}")
        f = M // self.m
        return CycValue(M, {e * f: c for e, c in self.coeffs.items()})

    def _check(self, other):
        if isinstance(other, int):
            return CycValue(self.m, {0: other})
        if other.m != self.m:
            raise ConductorMismatch(f"conductors {self.m} and {other.m}")
        return other

    # ring operations ----------------------------------------------------
    def __add__(self, other):
        other = self._check(other)
        out = dict(self.coeffs)
        for e, c in other.coeffs.items():
            out[e] = out.get(e, 0) + c
        return CycValue(self.m, out)

    __radd__ = __add__

    def __neg__(self):
        return CycValue(self.m, {e: -c for e, c in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-self._check(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, int):
            return CycValue(self.m, {e: c * other for e, c in self.coeffs.items()})
        other = self._check(other)
        m = self.m
        out = {}
        for e1, c1 in self.coeffs.items():
            for e2, c2 in other.coeffs.items():
                e = (e1 + e2) % m
                out[e] = out.get(e, 0) + c1 * c2
        return CycValue(m, out)

    __rmul__ = __mul__

    def conj(self) -> CycValue:
        """Complex conjugation: zeta^e -> zeta^(m-e)."""
        return CycValue(self.m, {-e: c for e, c in self.coeffs.items()})

    def shift(self, e: int) -> CycValue:
        """Multiply by zeta_m**e."""
        return CycValue(self.m, {k + e: c for k, c in self.coeffs.items()})

    def galois(self, k: int) -> CycValue:
        """Apply zeta -> zeta**k (k coprime to m)."""
        return CycValue(self.m, {e * k: c for e, c in self.coeffs.items()})

    # reduction ----------------------------------------------------------
    def reduce(self) -> tuple:
        """Canonical coefficients in the power basis of Z[x]/Phi_m."""
        if self._reduced is None:
            self._reduced = reduce_dense(self.m, self.coeffs)
        return self._reduced

    def is_zero(self) -> bool:
        return not any(self.reduce())

    def __eq__(self, other):
        if isinstance(other, int):
            other = CycValue(self.m, {0: other})
        if not isinstance(other, CycValue):
            return NotImplemented
        if other.m != self.m:
            M = self.m * other.m // gcd(self.m, other.m)
            return self.lift(M).reduce() == other.lift(M).reduce()
        return self.reduce() == other.reduce()

    def __hash__(self):
        # Lifted copies compare equal, so non-integers share one bucket.
        r = self.reduce()
        if not any(r[1:]):
            return hash(r[0] if r else 0)
        return hash("CycValue")

    def as_integer(self) -> int:
        r = self.reduce()
        if any(r[1:]):
            raise NotRational(f"value {self!r} is not an integer")
        return r[0] if r else 0

    def divide_exact(self, k: int) -> CycValue:
        return divide_exact(self, k)

    def to_complex(self) -> complex:
        m = self.m
        return sum(c * cmath.exp(2j * cmath.pi * e / m) for e, c in self.coeffs.items())

    def to_json(self) -> dict:
        return {"m": self.m, "coeffs": [[e, c] for e, c in sorted(self.coeffs.items())]}

    @classmethod
    def from_json(cls, d) -> CycValue:
        return cls(d["m"], {e: c for e, c in d["coeffs"]})

    def __repr__(self):
        if not self.coeffs:
            return "0"
        terms = []
        for e, c in sorted(self.coeffs.items()):
            terms.append(f"{c}" if e == 0 else f"{c}*z{self.m}^{e}")
        return " + ".join(terms)


def reduce_dense(m: int, coeffs) -> tuple:
    """Reduce ``sum c_e x^e`` (exponents taken mod m) modulo Phi_m."""
    phi = cyclotomic_poly(m)
    deg = len(phi) - 1
    if isinstance(coeffs, dict):
        vec = [0] * m
        for e, c in coeffs.items():
            vec[e % m] += c
    else:
        vec = list(coeffs)
    for i in range(len(vec) - 1, deg - 1, -1):
        c = vec[i]
        if c:
            base = i - deg
            for j in range(deg):
                if phi[j]:
                    vec[base + j] -= c * phi[j]
            vec[i] = 0
    return tuple(vec[:deg])


def root_of_unity(m: int, e: int) -> CycValue:
    return CycValue.root(m, e)


def as_integer(v) -> int:
    if isinstance(v, int):
        return v
    return v.as_integer()


def divide_exact(v, k: int):
    if k == 0:
        raise ZeroDivisionError("division by zero")
    if isinstance(v, int):
        if v % k:
            raise NotDivisible(f"{v} is not divisible by {k}")
        return v // k
    # Divisibility is a property of the reduced form; unreduced coefficients
    # may legitimately fail to divide (e.g. 1 + z3 + z3^2).
    r = v.reduce()
    if any(c % k for c in r):
        raise NotDivisible(f"{v!r} is not divisible by {k}")
    return CycValue(v.m, {e: c // k for e, c in enumerate(r)})


class Accumulator:
    """Dense accumulation of sum w * value * zeta_M**shift, reduced once at the end."""

    __slots__ = ("M", "vec")

    def __init__(self, M: int):
        self.M = M
        self.vec = [0] * M

    def add(self, value: CycValue, shift: int = 0, weight: int = 1):
        M = self.M
        f = M // value.m
        if f * value.m != M:
            raise ConductorMismatch(f"cannot accumulate conductor {value.m} into {M}")
        vec = self.vec
        for e, c in value.coeffs.items():
            k = (e * f + shift) % M
            vec[k] += c * weight

    def add_int(self, k: int, shift: int = 0):
        self.vec[shift % self.M] += k

    def merge(self, other: Accumulator):
        for i, c in enumerate(other.vec):
            self.vec[i] += c

    def shifted_into(self, target: Accumulator, shift: int):
        M = self.M
        tv = target.vec
        for i, c in enumerate(self.vec):
            if c:
                tv[(i + shift) % M] += c

    def value(self) -> CycValue:
        return CycValue(self.M, {e: c for e, c in enumerate(self.vec) if c})
