"""Deterministic finite-field towers with norm-compatible generators.

Every level F_{q^d} of a tower is realised over the prime field F_p by a
monic irreducible polynomial of absolute degree e*d (q = p^e). Elements are
packed integers ``sum c_i p^i`` of their coefficient vectors, so the prime
field F_p sits inside every level as the integers 0..p-1.

Multiplicative characters are never tabulated; a :class:`MultChar` is just an
exponent ``a`` with theta(gen^j) = zeta^(a*j), and restriction, inflation and
Frobenius twists are exponent arithmetic. This is sound because generators are
norm-compatible: the embedding of gen[d1] into F_{q^d2} equals
gen[d2]^((q^d2-1)/(q^d1-1)).
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from functools import lru_cache
from math import gcd

from .cyclo import CycValue
from .errors import (
    DegreeBoundExceeded,
    LevelTooLarge,
    NotPrimePower,
    NotSubfield,
    ZeroElement,
)

ELEMENT_BOUND = 2 ** 20
DESCRIPTOR_VERSION = 1


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    i = 2
    while i * i <= n:
        if n % i == 0:
            return False
        i += 1
    return True


def prime_factors(n: int) -> list[int]:
    out, i = [], 2
    while i * i <= n:
        if n % i == 0:
            out.append(i)
            while n % i == 0:
                n //= i
        i += 1
    if n > 1:
        out.append(n)
    return out


def prime_power(q: int) -> tuple[int, int]:
    """Return (p, e) with q = p**e, or raise NotPrimePower."""
    if q < 2:
        raise NotPrimePower(f"{q} is not a prime power")
    fs = prime_factors(q)
    if len(fs) != 1:
        raise NotPrimePower(f"{q} is not a prime power")
    p, e, r = fs[0], 0, q
    while r > 1:
        r //= p
        e += 1
    return p, e


def divisors(n: int) -> list[int]:
    return [d for d in range(1, n + 1) if n % d == 0]


def lcm(a: int, b: int) -> int:
    return a * b // gcd(a, b)


# -- packed polynomial arithmetic over F_p (construction time only) ---------

def _unpack(x: int, p: int, n: int) -> list[int]:
    out = []
    for _ in range(n):
        x, r = divmod(x, p)
        out.append(r)
    return out


def _pack(digits, p: int) -> int:
    x = 0
    for c in reversed(digits):
        x = x * p + c
    return x


def _mulmod(a: int, b: int, poly: list[int], p: int) -> int:
    n = len(poly) - 1
    da, db = _unpack(a, p, n), _unpack(b, p, n)
    prod = [0] * (2 * n - 1 if n else 1)
    for i, x in enumerate(da):
        if x:
            for j, y in enumerate(db):
                if y:
                    prod[i + j] = (prod[i + j] + x * y) % p
    for i in range(len(prod) - 1, n - 1, -1):
        c = prod[i]
        if c:
            for j in range(n + 1):
                prod[i - n + j] = (prod[i - n + j] - c * poly[j]) % p
    return _pack(prod[:n], p)


def _powmod(a: int, k: int, poly: list[int], p: int) -> int:
    r = 1
    while k:
        if k & 1:
            r = _mulmod(r, a, poly, p)
        a = _mulmod(a, a, poly, p)
        k >>= 1
    return r


def _prime_poly_irreducible(poly: list[int], p: int) -> bool:
    """Rabin test over F_p for a monic poly given low-to-high."""
    n = len(poly) - 1
    if n == 1:
        return True
    if poly[0] == 0:
        return False
    # x^(p^k) mod poly, using the packed representation of residues
    x = p  # the residue class of x
    powers = {}
    cur = x
    for k in range(1, n + 1):
        cur = _powmod(cur, p, poly, p)
        powers[k] = cur
    if powers[n] != x:
        return False
    for r in prime_factors(n):
        h = powers[n // r]
        # gcd(x^(p^(n/r)) - x, poly) must be 1
        diff = _unpack(h, p, n)
        diff[1] = (diff[1] - 1) % p
        if _gcd_deg(diff, poly, p) > 0:
            return False
    return True


def _trim(a):
    a = list(a)
    while a and a[-1] == 0:
        a.pop()
    return a


def _gcd_deg(a, b, p):
    a, b = _trim(a), _trim(b)
    while b:
        # a mod b
        a = list(a)
        inv = pow(b[-1], p - 2, p)
        while len(a) >= len(b):
            c = a[-1] * inv % p
            s = len(a) - len(b)
            for j in range(len(b)):
                a[s + j] = (a[s + j] - c * b[j]) % p
            a = _trim(a)
        a, b = b, a
    return len(a) - 1


def least_irreducible(p: int, n: int) -> list[int]:
    """Least monic irreducible of degree n over F_p (lower coefficients as a packed int)."""
    for k in range(p ** n):
        poly = _unpack(k, p, n) + [1]
        if _prime_poly_irreducible(poly, p):
            return poly
    raise AssertionError("no irreducible polynomial found")


# -- a single level ---------------------------------------------------------

class Field:
    """The level F_{q^d} of a tower. Elements are packed ints in range(size)."""

    def __init__(self, q: int, d: int, p: int, poly: list[int], gen: int):
        self.q = q
        self.d = d
        self.p = p
        self.poly = tuple(poly)
        self.abs_degree = len(poly) - 1
        self.size = p ** self.abs_degree
        self.order = self.size - 1
        self.gen = gen
        N = self.order
        exp = [0] * (2 * N + 1)
        log = [None] * self.size
        x = 1
        for k in range(N):
            exp[k] = x
            if log[x] is not None:
                raise AssertionError("generator is not primitive")
            log[x] = k
            x = _mulmod(x, gen, list(poly), p)
        for k in range(N, 2 * N + 1):
            exp[k] = exp[k - N]
        self.exp = exp
        self.log = log
        if p == 2:
            self.zech = None
        else:
            zech = [None] * N
            for k in range(N):
                y = exp[k]
                c0 = y % p
                z = y - c0 + (c0 + 1) % p
                zech[k] = log[z] if z else None
            self.zech = zech
            self._half = N // 2

    def __repr__(self):
        return f"Field(F_{self.size})"

    def __reduce__(self):
        raise TypeError("fields are tied to their tower; pickle the tower descriptor")

    # arithmetic ---------------------------------------------------------
    def add(self, a: int, b: int) -> int:
        if self.p == 2:
            return a ^ b
        if not a:
            return b
        if not b:
            return a
        la = self.log[a]
        z = self.zech[(self.log[b] - la) % self.order]
        if z is None:
            return 0
        return self.exp[la + z]

    def neg(self, a: int) -> int:
        if self.p == 2 or not a:
            return a
        return self.exp[self.log[a] + self._half]

    def sub(self, a: int, b: int) -> int:
        return self.add(a, self.neg(b))

    def mul(self, a: int, b: int) -> int:
        if not a or not b:
            return 0
        return self.exp[self.log[a] + self.log[b]]

    def inv(self, a: int) -> int:
        if not a:
            raise ZeroElement("zero has no inverse")
        return self.exp[self.order - self.log[a]]

    def div(self, a: int, b: int) -> int:
        return self.mul(a, self.inv(b))

    def pow(self, a: int, k: int) -> int:
        if not a:
            if k > 0:
                return 0
            if k == 0:
                return 1
            raise ZeroElement("zero to a negative power")
        return self.exp[(self.log[a] * k) % self.order]

    def frobenius(self, a: int, k: int = 1) -> int:
        """a -> a^(q^k) with q the tower's base field size."""
        return self.pow(a, pow(self.q, k, self.order) if self.order > 1 else 1)

    def dlog(self, a: int) -> int:
        if not a:
            raise ZeroElement("discrete log of zero")
        return self.log[a]

    def elements(self):
        return range(self.size)

    def units(self):
        return range(1, self.size)

    def coeffs(self, a: int) -> list[int]:
        return _unpack(a, self.p, self.abs_degree)

    def from_coeffs(self, digits) -> int:
        return _pack([c % self.p for c in digits], self.p)

    def from_int(self, k: int) -> int:
        """Image of the integer k in the prime field."""
        return k % self.p

    def trace_to_prime(self, a: int) -> int:
        """Absolute trace to F_p, returned as an int in range(p)."""
        t, x = 0, a
        for _ in range(self.abs_degree):
            t = self.add(t, x)
            x = self.pow(x, self.p)
        if t >= self.p:
            raise AssertionError("trace left the prime field")
        return t


# -- towers -----------------------------------------------------------------

class FieldTower:
    """All levels F_{q^d} with d dividing D, with compatible embeddings."""

    def __init__(self, q: int, degrees, element_bound: int = ELEMENT_BOUND):
        p, e = prime_power(q)
        degrees = sorted(set(int(d) for d in degrees))
        if not degrees or degrees[0] < 1:
            raise ValueError("degrees must be a nonempty list of positive integers")
        D = 1
        for d in degrees:
            D = lcm(D, d)
        if q ** D > element_bound:
            raise DegreeBoundExceeded(f"q^{D} = {q ** D} exceeds the element bound {element_bound}")
        self.q, self.p, self.e, self.D = q, p, e, D
        self.degrees = divisors(D)
        self.requested = degrees
        polys = {d: least_irreducible(p, e * d) for d in self.degrees}

        # top level: least primitive element
        top_poly = polys[D]
        N = q ** D - 1
        qf = prime_factors(N) if N > 1 else []
        gen_top = None
        for cand in range(1, q ** D):
            if all(_powmod(cand, N // r, top_poly, p) != 1 for r in qf):
                gen_top = cand
                break
        top = Field(q, D, p, top_poly, gen_top)

        self._fields = {D: top}
        self._to_top = {D: list(range(top.size))}
        self._from_top = {D: {x: x for x in range(top.size)}}
        for d in self.degrees:
            if d == D:
                continue
            Qd = q ** d
            poly = polys[d]
            step = N // (Qd - 1)
            roots = []
            for cand in [0] + [top.exp[k * step] for k in range(Qd - 1)]:
                if self._eval_prime_poly(top, poly, cand) == 0:
                    roots.append(cand)
            r = min(roots)
            rpow = [1]
            for _ in range(e * d - 1):
                rpow.append(top.mul(rpow[-1], r))
            table = []
            for x in range(Qd):
                y = 0
                for c, rp in zip(_unpack(x, p, e * d), rpow):
                    if c:
                        y = top.add(y, top.mul(c, rp))
                table.append(y)
            inv = {y: x for x, y in enumerate(table)}
            self._to_top[d] = table
            self._from_top[d] = inv
            gen_d = inv[top.exp[step]]
            self._fields[d] = Field(q, d, p, poly, gen_d)
        self._embed_cache = {}

    @staticmethod
    def _eval_prime_poly(F: Field, poly, x: int) -> int:
        acc = 0
        for c in reversed(poly):
            acc = F.add(F.mul(acc, x), c)
        return acc

    def __repr__(self):
        return f"FieldTower(q={self.q}, D={self.D})"

    # access -------------------------------------------------------------
    def field(self, d: int) -> Field:
        try:
            return self._fields[d]
        except KeyError:
            raise LevelTooLarge(f"level {d} is not in the tower over F_{self.q} (D={self.D})") from None

    def field_of_size(self, Q: int) -> Field:
        d, r = 0, 1
        while r < Q:
            r *= self.q
            d += 1
        if r != Q:
            raise NotSubfield(f"F_{Q} is not a level over F_{self.q}")
        return self.field(d)

    def level_of(self, F: Field) -> int:
        return F.d

    def has_size(self, Q: int) -> bool:
        try:
            self.field_of_size(Q)
            return True
        except (NotSubfield, LevelTooLarge):
            return False

    # embeddings ---------------------------------------------------------
    def embed_table(self, d1: int, d2: int) -> list[int]:
        if d2 % d1:
            raise NotSubfield(f"F_q^{d1} is not a subfield of F_q^{d2}")
        key = (d1, d2)
        t = self._embed_cache.get(key)
        if t is None:
            inv2 = self._from_top[d2]
            t = [inv2[y] for y in self._to_top[d1]]
            self._embed_cache[key] = t
        return t

    def embed(self, x: int, d1: int, d2: int) -> int:
        return self.embed_table(d1, d2)[x]

    def descend(self, y: int, d2: int, d1: int) -> int:
        """Inverse of embed: the level-d1 element whose image is y."""
        table = self.embed_table(d1, d2)
        inv = self._embed_cache.get((d1, d2, "inv"))
        if inv is None:
            inv = {v: k for k, v in enumerate(table)}
            self._embed_cache[(d1, d2, "inv")] = inv
        try:
            return inv[y]
        except KeyError:
            raise NotSubfield(f"element {y} of level {d2} does not lie in level {d1}") from None

    def norm_to_subfield(self, x: int, D: int, d: int) -> int:
        if D % d:
            raise NotSubfield(f"{d} does not divide {D}")
        if not x:
            raise ZeroElement("norm of zero")
        F = self.field(D)
        y = F.pow(x, (self.q ** D - 1) // (self.q ** d - 1))
        return self.descend(y, D, d)

    def dlog(self, x: int, d: int) -> int:
        return self.field(d).dlog(x)

    # serialisation ------------------------------------------------------
    def descriptor(self) -> dict:
        return {
            "version": DESCRIPTOR_VERSION,
            "q": self.q,
            "p": self.p,
            "degrees": self.degrees,
            "polys": {str(d): list(self._fields[d].poly) for d in self.degrees},
            "gens": {str(d): self._fields[d].coeffs(self._fields[d].gen) for d in self.degrees},
        }

    def descriptor_hash(self) -> str:
        blob = json.dumps(self.descriptor(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


@lru_cache(maxsize=None)
def _build(q: int, D: int) -> FieldTower:
    return FieldTower(q, [D])


def build_tower(q: int, degrees) -> FieldTower:
    """Cached tower over F_q containing every level dividing lcm(degrees)."""
    prime_power(q)
    degrees = list(degrees)
    if not degrees:
        raise ValueError("degrees must be nonempty")
    D = 1
    for d in degrees:
        D = lcm(D, int(d))
    if q ** D > ELEMENT_BOUND:
        raise DegreeBoundExceeded(f"q^{D} = {q ** D} exceeds the element bound {ELEMENT_BOUND}")
    return _build(q, D)


# -- multiplicative characters ------------------------------------------------

@dataclass(frozen=True)
class MultChar:
    """theta: F_Q^x -> C^x given by theta(gen^j) = zeta_{Q-1}^(exponent*j)."""

    size: int
    exponent: int

    def __post_init__(self):
        object.__setattr__(self, "exponent", self.exponent % (self.size - 1) if self.size > 2 else 0)

    @property
    def modulus(self) -> int:
        return self.size - 1

    def __mul__(self, other: MultChar) -> MultChar:
        if other.size != self.size:
            raise ValueError("characters of different fields")
        return MultChar(self.size, self.exponent + other.exponent)

    def inverse(self) -> MultChar:
        return MultChar(self.size, -self.exponent)

    def is_trivial(self) -> bool:
        return self.exponent == 0


def char_eval(tower: FieldTower, theta: MultChar, x: int, m: int | None = None) -> CycValue:
    F = tower.field_of_size(theta.size)
    if not x:
        raise ZeroElement("characters are evaluated on units only")
    N = theta.modulus
    if m is None:
        m = N
    if m % N:
        from .errors import ConductorMismatch

        raise ConductorMismatch(f"working conductor {m} is not a multiple of {N}")
    return CycValue.root(m, theta.exponent * F.dlog(x) * (m // N))


def restrict_char(theta: MultChar, sub_size: int) -> MultChar:
    """Restriction to the subfield of size sub_size."""
    if not _is_subfield_size(sub_size, theta.size):
        raise NotSubfield(f"F_{sub_size} is not a subfield of F_{theta.size}")
    return MultChar(sub_size, theta.exponent)


def inflate_char_by_norm(chi: MultChar, big_size: int) -> MultChar:
    """chi o Nm from F_big down to chi's field."""
    if not _is_subfield_size(chi.size, big_size):
        raise NotSubfield(f"F_{chi.size} is not a subfield of F_{big_size}")
    return MultChar(big_size, chi.exponent * ((big_size - 1) // (chi.size - 1)))


def frobenius_twist(theta: MultChar, base: int, k: int = 1) -> MultChar:
    """theta o (x -> x^(base^k))."""
    return MultChar(theta.size, theta.exponent * pow(base, k, max(theta.modulus, 1)))


def orbit(theta: MultChar, base: int) -> frozenset:
    """Exponents in the orbit of theta under multiplication by base."""
    N = theta.modulus
    if N == 1:
        return frozenset({0})
    a = theta.exponent % N
    seen = []
    while a not in seen:
        seen.append(a)
        a = a * base % N
    return frozenset(seen)


def orbit_rep(theta: MultChar, base: int) -> int:
    return min(orbit(theta, base))


def is_regular(theta: MultChar, n_factors: int, base: int) -> bool:
    """True iff the orbit of theta under x -> x^base has exactly n_factors elements."""
    return len(orbit(theta, base)) == n_factors


def regular_orbit_reps(size: int, n_factors: int, base: int) -> list[int]:
    """Least exponents of the regular orbits of characters of F_size^x under x -> x^base."""
    reps, seen = [], set()
    for a in range(size - 1):
        if a in seen:
            continue
        o = orbit(MultChar(size, a), base)
        seen |= o
        if len(o) == n_factors:
            reps.append(min(o))
    return reps


def _is_subfield_size(small: int, big: int) -> bool:
    if small > big:
        return False
    p1, e1 = prime_power(small)
    p2, e2 = prime_power(big)
    return p1 == p2 and e2 % e1 == 0
