"""Exact linear algebra over tower levels and conjugacy classes of GL_n.

Matrices act on column vectors. A conjugacy class of GL_n(F_Q) is recorded
as a :class:`ClassData`: the multiset of (monic irreducible f != x,
partition) pairs coming from the primary rational canonical decomposition.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from . import polys
from .errors import (
    BoundExceeded,
    LevelMismatch,
    NotInvariant,
    NotSigmaStable,
    PartitionMismatch,
    SingularMatrix,
)
from .fields import Field, FieldTower

ELEMENT_ENUMERATION_BOUND = 200_000


class MatF:
    """An n x n matrix over a tower level; rows are tuples of packed ints."""

    __slots__ = ("field", "rows")

    def __init__(self, field: Field, rows):
        self.field = field
        self.rows = tuple(tuple(r) for r in rows)

    @property
    def n(self) -> int:
        return len(self.rows)

    def __eq__(self, other):
        return isinstance(other, MatF) and self.field is other.field and self.rows == other.rows

    def __hash__(self):
        return hash(self.rows)

    def __repr__(self):
        return f"MatF(F_{self.field.size}, {list(map(list, self.rows))})"

    def __matmul__(self, other: MatF) -> MatF:
        return matmul(self, other)

    def col(self, j: int) -> tuple:
        return tuple(r[j] for r in self.rows)


def identity(F: Field, n: int) -> MatF:
    return MatF(F, [[1 if i == j else 0 for j in range(n)] for i in range(n)])


def zero_matrix(F: Field, n: int, m: int | None = None) -> MatF:
    return MatF(F, [[0] * (n if m is None else m) for _ in range(n)])


def _check_same(A: MatF, B: MatF):
    if A.field is not B.field:
        raise LevelMismatch(f"matrices over F_{A.field.size} and F_{B.field.size}")


def matmul(A: MatF, B: MatF) -> MatF:
    _check_same(A, B)
    F = A.field
    fadd, fmul = F.add, F.mul
    cols = list(zip(*B.rows))
    out = []
    for r in A.rows:
        row = []
        for c in cols:
            acc = 0
            for x, y in zip(r, c):
                if x and y:
                    acc = fadd(acc, fmul(x, y))
            row.append(acc)
        out.append(row)
    return MatF(F, out)


def matvec(A: MatF, v) -> list:
    F = A.field
    fadd, fmul = F.add, F.mul
    out = []
    for r in A.rows:
        acc = 0
        for x, y in zip(r, v):
            if x and y:
                acc = fadd(acc, fmul(x, y))
        out.append(acc)
    return out


def madd(A: MatF, B: MatF) -> MatF:
    _check_same(A, B)
    F = A.field
    return MatF(F, [[F.add(x, y) for x, y in zip(r, s)] for r, s in zip(A.rows, B.rows)])


def mscale(A: MatF, c: int) -> MatF:
    F = A.field
    return MatF(F, [[F.mul(x, c) for x in r] for r in A.rows])


def transpose(A: MatF) -> MatF:
    return MatF(A.field, list(zip(*A.rows)))


def rref(F: Field, rows) -> tuple[list, list]:
    """Reduced row echelon form of a list of row vectors; returns (rows, pivots)."""
    M = [list(r) for r in rows]
    if not M:
        return [], []
    ncols = len(M[0])
    pivots = []
    r = 0
    fadd, fmul, fneg = F.add, F.mul, F.neg
    for c in range(ncols):
        piv = None
        for i in range(r, len(M)):
            if M[i][c]:
                piv = i
                break
        if piv is None:
            continue
        M[r], M[piv] = M[piv], M[r]
        inv = F.inv(M[r][c])
        M[r] = [fmul(x, inv) for x in M[r]]
        for i in range(len(M)):
            if i != r and M[i][c]:
                f = fneg(M[i][c])
                M[i] = [fadd(x, fmul(f, y)) for x, y in zip(M[i], M[r])]
        pivots.append(c)
        r += 1
        if r == len(M):
            break
    return M[:r], pivots


def rank(A: MatF) -> int:
    return len(rref(A.field, A.rows)[1])


def det(A: MatF) -> int:
    F = A.field
    M = [list(r) for r in A.rows]
    n = len(M)
    d = 1
    for c in range(n):
        piv = next((i for i in range(c, n) if M[i][c]), None)
        if piv is None:
            return 0
        if piv != c:
            M[c], M[piv] = M[piv], M[c]
            d = F.neg(d)
        d = F.mul(d, M[c][c])
        inv = F.inv(M[c][c])
        for i in range(c + 1, n):
            if M[i][c]:
                f = F.neg(F.mul(M[i][c], inv))
                M[i] = [F.add(x, F.mul(f, y)) for x, y in zip(M[i], M[c])]
    return d


def inverse(A: MatF) -> MatF:
    F = A.field
    n = A.n
    aug = [list(r) + [1 if i == j else 0 for j in range(n)] for i, r in enumerate(A.rows)]
    R, piv = rref(F, aug)
    if piv[:n] != list(range(n)):
        raise SingularMatrix("matrix is not invertible")
    return MatF(F, [r[n:] for r in R])


def charpoly(A: MatF) -> tuple:
    """Characteristic polynomial via Hessenberg reduction (monic, low-to-high)."""
    F = A.field
    n = A.n
    H = [list(r) for r in A.rows]
    fadd, fmul, fneg = F.add, F.mul, F.neg
    for m in range(1, n - 1):
        i = next((i for i in range(m, n) if H[i][m - 1]), None)
        if i is None:
            continue
        if i != m:
            H[i], H[m] = H[m], H[i]
            for row in H:
                row[i], row[m] = row[m], row[i]
        tinv = F.inv(H[m][m - 1])
        for j in range(m + 1, n):
            u = fmul(H[j][m - 1], tinv)
            if u:
                nu = fneg(u)
                H[j] = [fadd(x, fmul(nu, y)) for x, y in zip(H[j], H[m])]
                for row in H:
                    row[m] = fadd(row[m], fmul(u, row[j]))
    p = [(1,)]
    for m in range(1, n + 1):
        pm = polys.mul(F, (fneg(H[m - 1][m - 1]), 1), p[m - 1])
        t = 1
        for i in range(1, m):
            t = fmul(t, H[m - i][m - i - 1])
            c = fmul(t, H[m - i - 1][m - 1])
            if c:
                pm = polys.sub(F, pm, polys.scale(F, p[m - i - 1], c))
        p.append(pm)
    return p[n]


def poly_eval_matrix(f, A: MatF) -> MatF:
    F = A.field
    n = A.n
    R = zero_matrix(F, n)
    for c in reversed(f):
        R = matmul(R, A)
        if c:
            R = madd(R, mscale(identity(F, n), c))
    return R


def companion(F: Field, f) -> MatF:
    """Companion matrix of a monic polynomial (subdiagonal ones, last column -f_i)."""
    m = len(f) - 1
    rows = [[0] * m for _ in range(m)]
    for i in range(1, m):
        rows[i][i - 1] = 1
    for i in range(m):
        rows[i][m - 1] = F.neg(f[i])
    return MatF(F, rows)


def block_diag(*blocks: MatF) -> MatF:
    F = blocks[0].field
    for b in blocks:
        if b.field is not F:
            raise LevelMismatch("blocks over different fields")
    n = sum(b.n for b in blocks)
    rows = []
    off = 0
    for b in blocks:
        for r in b.rows:
            rows.append([0] * off + list(r) + [0] * (n - off - b.n))
        off += b.n
    return MatF(F, rows)


# -- partitions ---------------------------------------------------------------

def conjugate(part) -> tuple:
    part = [x for x in part if x > 0]
    if not part:
        return ()
    return tuple(sum(1 for x in part if x > i) for i in range(max(part)))


@lru_cache(maxsize=None)
def partitions(k: int, maxpart: int | None = None) -> tuple:
    """Partitions of k as non-increasing tuples, in reverse-lex order."""
    if maxpart is None:
        maxpart = k
    if k == 0:
        return ((),)
    out = []
    for first in range(min(k, maxpart), 0, -1):
        for rest in partitions(k - first, first):
            out.append((first,) + rest)
    return tuple(out)


# -- class data ---------------------------------------------------------------

@dataclass(frozen=True)
class ClassData:
    q: int
    n: int
    pairs: tuple

    def __post_init__(self):
        pairs = tuple(sorted(((tuple(f), tuple(sorted(lam, reverse=True))) for f, lam in self.pairs),
                             key=lambda p: polys.poly_key(p[0])))
        object.__setattr__(self, "pairs", pairs)

    def key(self) -> str:
        body = ";".join(f"{polys.fmt(f, self.q)}|{','.join(map(str, lam))}" for f, lam in self.pairs)
        return f"q{self.q}:n{self.n}:[{body}]"

    __str__ = key

    @classmethod
    def from_key(cls, s: str) -> ClassData:
        head, body = s.split(":[", 1)
        qs, ns = head.split(":")
        Q, n = int(qs[1:]), int(ns[1:])
        body = body.rstrip("]")
        pairs = []
        for part in body.split(";"):
            if not part:
                continue
            fs, ls = part.split("|")
            pairs.append((polys.parse(fs, Q), tuple(int(x) for x in ls.split(","))))
        c = cls(Q, n, tuple(pairs))
        if c.size_check() != n:
            raise ValueError(f"class data {s!r} has total degree {c.size_check()}, not {n}")
        return c

    def size_check(self) -> int:
        return sum((len(f) - 1) * sum(lam) for f, lam in self.pairs)

    def is_primary(self) -> bool:
        return len(self.pairs) == 1


def merge_classes(c1: ClassData, c2: ClassData) -> ClassData:
    """Class of the block-diagonal sum."""
    if c1.q != c2.q:
        raise LevelMismatch("classes over different fields")
    d = {}
    for f, lam in c1.pairs + c2.pairs:
        d[f] = d.get(f, ()) + lam
    return ClassData(c1.q, c1.n + c2.n, tuple(d.items()))


def class_of(g: MatF) -> ClassData:
    F = g.field
    n = g.n
    cp = charpoly(g)
    if cp[0] == 0:
        raise SingularMatrix("class_of requires an invertible matrix")
    pairs = []
    for f, k in polys.factor(F, cp):
        d = len(f) - 1
        if k == 1:
            pairs.append((f, (1,)))
            continue
        A = poly_eval_matrix(f, g)
        dims = [0]
        P = A
        while dims[-1] < d * k:
            dims.append(n - rank(P))
            P = matmul(P, A)
        jumps = [(dims[j] - dims[j - 1]) // d for j in range(1, len(dims))]
        pairs.append((f, conjugate(jumps)))
    return ClassData(F.size, n, tuple(pairs))


def representative(c: ClassData, F: Field) -> MatF:
    """Direct sum of companion matrices of f^k over the parts k of each partition."""
    if F.size != c.q:
        raise LevelMismatch(f"class over F_{c.q}, field F_{F.size}")
    blocks = []
    for f, lam in c.pairs:
        for k in lam:
            blocks.append(companion(F, polys.power(F, f, k)))
    return block_diag(*blocks)


def class_det(c: ClassData, F: Field) -> int:
    """Determinant of any element of the class: prod ((-1)^deg f f(0))^|lambda|."""
    d = 1
    for f, lam in c.pairs:
        r = f[0] if (len(f) - 1) % 2 == 0 else F.neg(f[0])
        d = F.mul(d, F.pow(r, sum(lam)))
    return d


def group_order(n: int, Q: int) -> int:
    out = 1
    for i in range(n):
        out *= Q ** n - Q ** i
    return out


def centralizer_order(c: ClassData) -> int:
    total = 1
    for f, lam in c.pairs:
        Qf = c.q ** (len(f) - 1)
        lc = conjugate(lam)
        e = sum(x * x for x in lc)
        val = Fraction(Qf) ** e
        for part in set(lam):
            mult = lam.count(part)
            for j in range(1, mult + 1):
                val *= 1 - Fraction(1, Qf ** j)
        if val.denominator != 1:
            raise AssertionError("non-integral centralizer order")
        total *= int(val)
    return total


def class_size(c: ClassData) -> int:
    return group_order(c.n, c.q) // centralizer_order(c)


def enumerate_classes(n: int, F: Field):
    """All ClassData of GL_n(F) in canonical order."""
    by_deg = {d: [f for f in polys.irreducibles(F, d) if f != polys.X] for d in range(1, n + 1)}
    cands = [f for d in range(1, n + 1) for f in sorted(by_deg[d], key=polys.poly_key)]

    def rec(start, remaining):
        if remaining == 0:
            yield ()
            return
        for i in range(start, len(cands)):
            f = cands[i]
            d = len(f) - 1
            if d > remaining:
                break
            for k in range(1, remaining // d + 1):
                for lam in partitions(k):
                    for rest in rec(i + 1, remaining - d * k):
                        yield ((f, lam),) + rest

    for pairs in rec(0, n):
        yield ClassData(F.size, n, pairs)


def enumerate_group(n: int, F: Field, bound: int = ELEMENT_ENUMERATION_BOUND):
    """All elements of GL_n(F), rows chosen outside the span of earlier rows."""
    order = group_order(n, F.size)
    if order > bound:
        raise BoundExceeded(f"|GL_{n}(F_{F.size})| = {order} exceeds {bound}")
    Q = F.size
    vectors = list(itertools.product(range(Q), repeat=n))

    def span_add(span, v):
        out = set(span)
        for s in span:
            for c in range(Q):
                out.add(tuple(F.add(x, F.mul(c, y)) for x, y in zip(s, v)))
        return out

    def rec(rows, span):
        if len(rows) == n:
            yield MatF(F, rows)
            return
        for v in vectors:
            if v in span:
                continue
            yield from rec(rows + [v], span_add(span, v) if len(rows) + 1 < n else span)

    yield from rec([], {tuple([0] * n)})


def conjugation_orbit_size(g: MatF) -> int:
    """Brute-force size of the conjugacy class of g (small groups only)."""
    seen = set()
    for x in enumerate_group(g.n, g.field):
        seen.add(matmul(matmul(x, g), inverse(x)).rows)
    return len(seen)


# -- subspaces ----------------------------------------------------------------

@dataclass(frozen=True)
class Subspace:
    q: int
    n: int
    basis: tuple
    pivots: tuple

    @property
    def dim(self) -> int:
        return len(self.basis)


def gaussian_binomial(n: int, k: int, Q: int) -> int:
    if k < 0 or k > n:
        return 0
    num, den = 1, 1
    for i in range(k):
        num *= Q ** (n - i) - 1
        den *= Q ** (i + 1) - 1
    return num // den


def _reduce_mod(F: Field, v, basis, pivots) -> list:
    v = list(v)
    fadd, fmul, fneg = F.add, F.mul, F.neg
    for b, c in zip(basis, pivots):
        x = v[c]
        if x:
            nx = fneg(x)
            v = [fadd(a, fmul(nx, y)) for a, y in zip(v, b)]
    return v


def rref_subspaces(F: Field, n: int, k: int):
    """Every k-dimensional subspace of F^n once, as (basis, pivots) in RREF."""
    Q = F.size
    for pivots in itertools.combinations(range(n), k):
        pset = set(pivots)
        free = [(i, j) for i, c in enumerate(pivots) for j in range(c + 1, n) if j not in pset]
        for vals in itertools.product(range(Q), repeat=len(free)):
            rows = [[0] * n for _ in range(k)]
            for i, c in enumerate(pivots):
                rows[i][c] = 1
            for (i, j), v in zip(free, vals):
                rows[i][j] = v
            yield tuple(tuple(r) for r in rows), pivots


def is_invariant(g: MatF, basis, pivots) -> bool:
    F = g.field
    for b in basis:
        if any(_reduce_mod(F, matvec(g, b), basis, pivots)):
            return False
    return True


def invariant_subspaces(g: MatF, k: int):
    """The k-dimensional g-stable subspaces, each once, in canonical RREF order."""
    F = g.field
    n = g.n
    for basis, pivots in rref_subspaces(F, n, k):
        if is_invariant(g, basis, pivots):
            yield Subspace(F.size, n, basis, pivots)


def restrict_and_quotient(g: MatF, W: Subspace) -> tuple[MatF, MatF]:
    F = g.field
    n, k = g.n, W.dim
    cols = []
    for b in W.basis:
        gb = matvec(g, b)
        if any(_reduce_mod(F, gb, W.basis, W.pivots)):
            raise NotInvariant("subspace is not stable under g")
        cols.append([gb[c] for c in W.pivots])
    AW = MatF(F, [[cols[j][i] for j in range(k)] for i in range(k)])
    comp = [c for c in range(n) if c not in W.pivots]
    qcols = []
    for u in comp:
        v = _reduce_mod(F, g.col(u), W.basis, W.pivots)
        qcols.append([v[s] for s in comp])
    m = n - k
    AQ = MatF(F, [[qcols[j][i] for j in range(m)] for i in range(m)])
    return AW, AQ


# -- embeddings ---------------------------------------------------------------

def levi_embed(g1: MatF, g2: MatF) -> MatF:
    if g1.field is not g2.field:
        raise LevelMismatch("Levi factors over different fields")
    return block_diag(g1, g2)


def unipotent_embed(X: MatF) -> MatF:
    F = X.field
    n = X.n
    rows = []
    for i in range(n):
        rows.append([1 if i == j else 0 for j in range(n)] + list(X.rows[i]))
    for i in range(n):
        rows.append([0] * n + [1 if i == j else 0 for j in range(n)])
    return MatF(F, rows)


_coord_cache: dict = {}


def subfield_coordinates(tower: FieldTower, big: Field, small: Field) -> list:
    """For each y in big, its coordinates over small in the basis 1, g, ..., g^(r-1), g = big.gen.

    Solved through the Frobenius conjugates: sigma^k(y) = sum c_i sigma^k(g)^i.
    """
    key = (id(tower), big.d, small.d)
    tab = _coord_cache.get(key)
    if tab is not None:
        return tab
    if big.d % small.d:
        raise LevelMismatch(f"F_{small.size} is not a subfield of F_{big.size}")
    r = big.d // small.d
    Qs = small.size
    g = big.gen
    conj_g = [big.pow(g, Qs ** k) for k in range(r)]
    V = MatF(big, [[big.pow(cg, i) for i in range(r)] for cg in conj_g])
    Vinv = inverse(V)
    tab = []
    for y in range(big.size):
        conj_y = [big.pow(y, Qs ** k) for k in range(r)]
        c = matvec(Vinv, conj_y)
        tab.append(tuple(tower.descend(x, big.d, small.d) for x in c))
    _coord_cache[key] = tab
    return tab


_mult_cache: dict = {}


def mult_matrix(tower: FieldTower, x: int, big: Field, small: Field) -> MatF:
    """Matrix over small of multiplication by x on big, basis 1, g, ..., g^(r-1)."""
    key = (id(tower), big.d, small.d)
    tab = _mult_cache.get(key)
    if tab is None:
        coords = subfield_coordinates(tower, big, small)
        r = big.d // small.d
        basis = [big.pow(big.gen, i) for i in range(r)]
        tab = []
        for y in range(big.size):
            cols = [coords[big.mul(y, b)] for b in basis]
            tab.append(tuple(tuple(cols[j][i] for j in range(r)) for i in range(r)))
        _mult_cache[key] = tab
    return MatF(small, tab[x])


def weil_embed(g: MatF, tower: FieldTower, small: Field) -> MatF:
    """GL_n(E) -> GL_{rn}(F): each entry replaced by its multiplication matrix over F."""
    E = g.field
    if E.d % small.d or E.d == small.d:
        raise LevelMismatch(f"F_{E.size} is not a proper extension of F_{small.size}")
    r = E.d // small.d
    n = g.n
    rows = [[0] * (r * n) for _ in range(r * n)]
    for i in range(n):
        for j in range(n):
            blk = mult_matrix(tower, g.rows[i][j], E, small).rows
            for a in range(r):
                for b in range(r):
                    rows[r * i + a][r * j + b] = blk[a][b]
    return MatF(small, rows)


def subfield_embed(g: MatF, tower: FieldTower, big: Field) -> MatF:
    """GL_n(F) -> GL_n(E), entrywise field embedding."""
    table = tower.embed_table(g.field.d, big.d)
    return MatF(big, [[table[x] for x in r] for r in g.rows])


def frobenius_map(g: MatF, sub_size: int) -> MatF:
    """Entrywise x -> x^sub_size."""
    E = g.field
    if E.size == sub_size or not _divides_level(sub_size, E.size):
        raise LevelMismatch(f"F_{sub_size} is not a proper subfield of F_{E.size}")
    return MatF(E, [[E.pow(x, sub_size) for x in r] for r in g.rows])


def _divides_level(small: int, big: int) -> bool:
    s = small
    while s < big:
        s *= small
    return s == big


def poly_frobenius(E: Field, f, sub_size: int) -> tuple:
    return tuple(E.pow(c, sub_size) for c in f)


def descend_class(c: ClassData, tower: FieldTower, small: Field) -> ClassData:
    E = tower.field_of_size(c.q)
    out = {}
    pairs = dict(c.pairs)
    done = set()
    for f, lam in c.pairs:
        if f in done:
            continue
        fs = poly_frobenius(E, f, small.size)
        if fs == f:
            g = f
            done.add(f)
        else:
            if fs not in pairs:
                raise NotSigmaStable(f"class {c.key()} is not stable under Frobenius")
            if pairs[fs] != lam:
                raise PartitionMismatch(f"conjugate factors carry different partitions in {c.key()}")
            g = polys.mul(E, f, fs)
            done.add(f)
            done.add(fs)
        gF = tuple(tower.descend(x, E.d, small.d) for x in g)
        out[gF] = lam
    return ClassData(small.size, c.n, tuple(out.items()))


def basechange_class(c: ClassData, tower: FieldTower, big: Field) -> ClassData:
    F = tower.field_of_size(c.q)
    table = tower.embed_table(F.d, big.d)
    out = {}
    for f, lam in c.pairs:
        fE = tuple(table[x] for x in f)
        for h, k in polys.factor(big, fE):
            if k != 1:
                raise AssertionError("irreducible polynomial became inseparable")
            out[h] = lam
    return ClassData(big.size, c.n, tuple(out.items()))


def shintani_norm(g: MatF, tower: FieldTower, small: Field) -> ClassData:
    """Class over the subfield of g * sigma(g), sigma the Frobenius of E/F."""
    h = matmul(g, frobenius_map(g, small.size))
    return descend_class(class_of(h), tower, small)
