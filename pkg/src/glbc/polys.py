"""Univariate polynomials over a tower level.

Polynomials are tuples of field elements, lowest degree first, with no
trailing zeros (the zero polynomial is the empty tuple).
"""
from __future__ import annotations

import random
from functools import lru_cache

from .fields import Field, prime_factors


def trim(a) -> tuple:
    a = list(a)
    while a and a[-1] == 0:
        a.pop()
    return tuple(a)


def deg(a) -> int:
    return len(a) - 1


def add(F: Field, a, b) -> tuple:
    if len(a) < len(b):
        a, b = b, a
    out = list(a)
    for i, c in enumerate(b):
        out[i] = F.add(out[i], c)
    return trim(out)


def neg(F: Field, a) -> tuple:
    return tuple(F.neg(c) for c in a)


def sub(F: Field, a, b) -> tuple:
    return add(F, a, neg(F, b))


def scale(F: Field, a, c) -> tuple:
    return trim(F.mul(x, c) for x in a)


def mul(F: Field, a, b) -> tuple:
    if not a or not b:
        return ()
    out = [0] * (len(a) + len(b) - 1)
    fadd, fmul = F.add, F.mul
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                if y:
                    out[i + j] = fadd(out[i + j], fmul(x, y))
    return trim(out)


def divmod_(F: Field, a, b):
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    a = list(a)
    db = len(b) - 1
    inv = F.inv(b[-1])
    if len(a) <= db:
        return (), trim(a)
    qt = [0] * (len(a) - db)
    fadd, fmul, fneg = F.add, F.mul, F.neg
    for i in range(len(a) - 1, db - 1, -1):
        c = a[i]
        if c:
            c = fmul(c, inv)
            qt[i - db] = c
            nc = fneg(c)
            for j in range(db + 1):
                if b[j]:
                    a[i - db + j] = fadd(a[i - db + j], fmul(nc, b[j]))
    return trim(qt), trim(a[:db])


def mod(F: Field, a, b) -> tuple:
    return divmod_(F, a, b)[1]


def monic(F: Field, a) -> tuple:
    if not a:
        return a
    return scale(F, a, F.inv(a[-1]))


def gcd(F: Field, a, b) -> tuple:
    a, b = trim(a), trim(b)
    while b:
        a, b = b, mod(F, a, b)
    return monic(F, a)


def powmod(F: Field, a, k: int, m) -> tuple:
    r = (1,)
    a = mod(F, a, m)
    while k:
        if k & 1:
            r = mod(F, mul(F, r, a), m)
        a = mod(F, mul(F, a, a), m)
        k >>= 1
    return mod(F, r, m)


def evaluate(F: Field, a, x: int) -> int:
    acc = 0
    for c in reversed(a):
        acc = F.add(F.mul(acc, x), c)
    return acc


def power(F: Field, a, k: int) -> tuple:
    r = (1,)
    for _ in range(k):
        r = mul(F, r, a)
    return r


X = (0, 1)


def is_irreducible(F: Field, f) -> bool:
    """Rabin's test for a monic polynomial over F."""
    n = deg(f)
    if n <= 0:
        return False
    if n == 1:
        return True
    if f[0] == 0:
        return False
    Q = F.size
    xq = [X]
    cur = X
    for _ in range(n):
        cur = powmod(F, cur, Q, f)
        xq.append(cur)
    if xq[n] != mod(F, X, f):
        return False
    for r in prime_factors(n):
        h = sub(F, xq[n // r], X)
        if deg(gcd(F, h, f)) > 0:
            return False
    return True


@lru_cache(maxsize=None)
def _irreducibles(field_key, F: Field, d: int) -> tuple:
    Q = F.size
    out = []
    if d == 1:
        return tuple((F.neg(a), 1) for a in range(Q))
    for k in range(Q ** d):
        low = []
        r = k
        for _ in range(d):
            r, c = divmod(r, Q)
            low.append(c)
        f = tuple(low) + (1,)
        if is_irreducible(F, f):
            out.append(f)
    return tuple(out)


def irreducibles(F: Field, d: int) -> tuple:
    """All monic irreducible polynomials of degree d over F."""
    return _irreducibles(id(F), F, d)


def _split_equal_degree(F: Field, g, d: int, rng: random.Random) -> list:
    """Cantor-Zassenhaus: split a squarefree product of degree-d irreducibles."""
    n = deg(g)
    if n == d:
        return [g]
    Q = F.size
    while True:
        a = trim(rng.randrange(Q) for _ in range(n))
        if deg(a) < 1:
            continue
        if F.p == 2:
            # trace map a + a^2 + ... + a^(2^(k-1)), k = abs degree * d
            k = F.abs_degree * d
            t, cur = a, a
            for _ in range(k - 1):
                cur = mod(F, mul(F, cur, cur), g)
                t = add(F, t, cur)
            h = gcd(F, t, g)
        else:
            e = (Q ** d - 1) // 2
            h = gcd(F, sub(F, powmod(F, a, e, g), (1,)), g)
        if 0 < deg(h) < n:
            return _split_equal_degree(F, h, d, rng) + _split_equal_degree(
                F, divmod_(F, g, h)[0], d, rng
            )


def factor(F: Field, f) -> list:
    """Monic irreducible factors with multiplicities, sorted canonically."""
    f = monic(F, trim(f))
    if deg(f) < 1:
        return []
    rng = random.Random(0x5EED)
    out = {}
    rest = f
    d = 1
    Q = F.size
    xpow = X
    while deg(rest) >= 1:
        if 2 * d > deg(rest):
            # what remains is a power of a single irreducible or a product of
            # irreducibles of degree > deg/2, i.e. irreducible after removing powers
            g = rest
            # find irreducible base: rest = h^k with h irreducible
            for h, k in _split_power(F, rest, rng):
                out[h] = out.get(h, 0) + k
            break
        xpow = powmod(F, xpow, Q, rest)
        g = gcd(F, sub(F, xpow, X), rest)
        while deg(g) > 0:
            for h in _split_equal_degree(F, g, d, rng):
                out[h] = out.get(h, 0) + 1
            rest = divmod_(F, rest, g)[0]
            g = gcd(F, rest, g)
        xpow = mod(F, xpow, rest) if deg(rest) >= 1 else xpow
        d += 1
    return sorted(out.items(), key=lambda kv: poly_key(kv[0]))


def _split_power(F: Field, f, rng):
    # f has no irreducible factor of degree <= deg(f)/2 except possibly
    # repeated ones; handle by trying squarefree decomposition via gcd with f'
    n = deg(f)
    if is_irreducible(F, f):
        return [(f, 1)]
    # f = h^k for some irreducible h of degree n/k with k >= 2
    for k in range(2, n + 1):
        if n % k:
            continue
        for h in irreducibles(F, n // k):
            if power(F, h, k) == f:
                return [(h, k)]
    raise AssertionError("factorisation failed")


def poly_key(f) -> tuple:
    """Canonical order: degree first, then coefficients from the top down."""
    return (len(f), tuple(reversed(f)))


def derivative(F: Field, f) -> tuple:
    out = []
    for i in range(1, len(f)):
        c = 0
        for _ in range(i % F.p):
            c = F.add(c, f[i])
        out.append(c)
    return trim(out)


def fmt(f, Q: int, var: str = "x") -> str:
    """Human/cache string such as 'x^2+x+1'; non-prime coefficients print as [k]."""
    prime = _is_prime_size(Q)
    terms = []
    for i in range(len(f) - 1, -1, -1):
        c = f[i]
        if not c:
            continue
        cs = str(c) if prime else f"[{c}]"
        if i == 0:
            terms.append(cs)
        else:
            mon = var if i == 1 else f"{var}^{i}"
            terms.append(mon if c == 1 else f"{cs}*{mon}")
    return "+".join(terms) if terms else "0"


def parse(s: str, Q: int) -> tuple:
    """Inverse of :func:`fmt`."""
    coeffs = {}
    for term in s.replace(" ", "").split("+"):
        if not term:
            continue
        if "x" in term:
            if "*" in term:
                cs, mon = term.split("*")
                c = int(cs.strip("[]"))
            else:
                c, mon = 1, term
            e = int(mon.split("^")[1]) if "^" in mon else 1
        else:
            c, e = int(term.strip("[]")), 0
        coeffs[e] = c
    top = max(coeffs) if coeffs else -1
    return trim(coeffs.get(i, 0) for i in range(top + 1))


def _is_prime_size(Q: int) -> bool:
    from .fields import is_prime

    return is_prime(Q)
