"""Certified real root isolation and exact comparison of real algebraic numbers.

A real algebraic number is carried as an :class:`IsolatedRoot`: a square-free
rational polynomial together with a closed rational interval containing
exactly one of its roots.  Rational numbers are the width-zero case.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .poly import (
    Polynomial,
    RationalFunction,
    poly_gcd,
    squarefree_decomposition,
    squarefree_part,
)

# rational-root detection is skipped above this leading coefficient
_MAX_RATIONAL_DEN = 10**12


def sturm_sequence(p: Polynomial) -> list[Polynomial]:
    seq = [p, p.derivative()]
    while seq[-1]:
        seq.append(-(seq[-2] % seq[-1]))
    return seq[:-1]


def sign_variations(seq: list[Polynomial], x: Fraction) -> int:
    count = 0
    last = 0
    for q in seq:
        v = q(x)
        if v == 0:
            continue
        s = 1 if v > 0 else -1
        if last and s != last:
            count += 1
        last = s
    return count


def count_roots(p: Polynomial, lo: Fraction, hi: Fraction, seq=None) -> int:
    """Number of distinct real roots of ``p`` in the closed interval [lo, hi]."""
    if p.degree < 1:
        return 0
    lo, hi = Fraction(lo), Fraction(hi)
    if seq is None:
        seq = sturm_sequence(squarefree_part(p))
    n = sign_variations(seq, lo) - sign_variations(seq, hi)
    if seq[0](lo) == 0:
        n += 1
    return n


def cauchy_bound(p: Polynomial) -> Fraction:
    """All complex roots of ``p`` have modulus strictly below this bound."""
    lc = abs(p.lc)
    return 1 + max((abs(c) / lc for c in p.coeffs[:-1]), default=Fraction(0))


def _sign(v) -> int:
    return (v > 0) - (v < 0)


@dataclass(frozen=True)
class IsolatedRoot:
    """A real root of ``poly`` enclosed in [lo, hi].

    ``poly`` is square-free and has exactly one root in [lo, hi]; when
    ``lo < hi`` neither endpoint is a root.  ``multiplicity`` refers to the
    polynomial the root was isolated from.
    """

    poly: Polynomial
    lo: Fraction
    hi: Fraction
    multiplicity: int = 1

    @classmethod
    def rational(cls, value, multiplicity: int = 1) -> "IsolatedRoot":
        v = Fraction(value)
        return cls(Polynomial([-v, 1]), v, v, multiplicity)

    @property
    def is_exact(self) -> bool:
        return self.lo == self.hi

    @property
    def exact(self) -> Optional[Fraction]:
        return self.lo if self.lo == self.hi else None

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def refined_value(self) -> float:
        if self.lo == self.hi:
            return float(self.lo)
        return float(self.refine(Fraction(1, 2**60)).midpoint)

    @property
    def midpoint(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def __float__(self) -> float:
        return self.refined_value

    def refine(self, width) -> "IsolatedRoot":
        """Bisect until the enclosure is narrower than ``width``."""
        width = Fraction(width)
        if self.hi - self.lo <= width:
            return self
        p = self.poly
        lo, hi = self.lo, self.hi
        slo = _sign(p(lo))
        while hi - lo > width:
            mid = (lo + hi) / 2
            sm = _sign(p(mid))
            if sm == 0:
                return IsolatedRoot(Polynomial([-mid, 1]), mid, mid, self.multiplicity)
            if sm == slo:
                lo = mid
            else:
                hi = mid
        return IsolatedRoot(p, lo, hi, self.multiplicity)

    def to_json(self, digits: int = 12) -> dict:
        r = self.refine(Fraction(1, 10 ** (digits + 2)))
        out = {
            "value": f"{float(r.midpoint):.{digits}g}",
            "lo": str(r.lo),
            "hi": str(r.hi),
            "multiplicity": self.multiplicity,
        }
        if self.is_exact:
            out["exact"] = str(self.lo)
        return out

    def __repr__(self) -> str:
        if self.is_exact:
            return f"IsolatedRoot({self.lo}, m={self.multiplicity})"
        return f"IsolatedRoot(~{self.refined_value:.12g}, m={self.multiplicity})"


def _rational_root(p: Polynomial, lo: Fraction, hi: Fraction) -> Optional[Fraction]:
    """The rational root of square-free ``p`` in (lo, hi), if that root is rational."""
    ints = p.primitive_integer()
    L = abs(ints[-1])
    if L > _MAX_RATIONAL_DEN:
        return None
    r = IsolatedRoot(p, lo, hi).refine(Fraction(1, 4 * L * L))
    if r.is_exact:
        return r.lo
    cand = r.midpoint.limit_denominator(L)
    if r.lo <= cand <= r.hi and p(cand) == 0:
        return cand
    return None


def _isolate_squarefree(p: Polynomial, lo: Fraction, hi: Fraction) -> list[tuple[Fraction, Fraction]]:
    seq = sturm_sequence(p)
    found: list[tuple[Fraction, Fraction]] = []
    for end in (lo, hi):
        if p(end) == 0:
            found.append((end, end))
    if lo == hi:
        return found[:1]

    def open_count(a, b):
        # roots in the open interval (a, b)
        n = sign_variations(seq, a) - sign_variations(seq, b)
        return n - (1 if p(b) == 0 else 0)

    stack = [(lo, hi, open_count(lo, hi))]
    while stack:
        a, b, k = stack.pop()
        if k == 0:
            continue
        if k == 1 and p(a) != 0 and p(b) != 0:
            found.append((a, b))
            continue
        m = (a + b) / 2
        if p(m) == 0:
            found.append((m, m))
        stack.append((a, m, open_count(a, m)))
        stack.append((m, b, open_count(m, b)))
    return found


def isolate_real_roots(p: Polynomial, lo=None, hi=None) -> list[IsolatedRoot]:
    """Isolate the distinct real roots of ``p`` in [lo, hi] (whole line by default).

    Roots are returned sorted with pairwise disjoint enclosures.  Rational
    roots (with moderately sized denominators) get width-zero enclosures.
    """
    if p.is_zero():
        raise ValueError("cannot isolate the roots of the zero polynomial")
    if p.degree < 1:
        return []
    if lo is None or hi is None:
        B = cauchy_bound(p)
        lo = -B if lo is None else Fraction(lo)
        hi = B if hi is None else Fraction(hi)
    lo, hi = Fraction(lo), Fraction(hi)
    if lo > hi:
        return []
    roots: list[IsolatedRoot] = []
    for factor, mult in squarefree_decomposition(p):
        rest = factor
        rational: list[Fraction] = []
        for a, b in _isolate_squarefree(factor, lo, hi):
            if a == b:
                rational.append(a)
                continue
            q = _rational_root(factor, a, b)
            if q is not None:
                rational.append(q)
            else:
                roots.append(IsolatedRoot(factor, a, b, mult))
        for q in rational:
            roots.append(IsolatedRoot.rational(q, mult))
            rest = rest.exact_div(Polynomial([-q, 1]))
        if rational:
            # the irrational roots keep a defining polynomial free of rational factors
            roots = [
                IsolatedRoot(rest, r.lo, r.hi, r.multiplicity) if r.poly == factor else r
                for r in roots
            ]
    return _separate(roots)


def _separate(roots: list[IsolatedRoot]) -> list[IsolatedRoot]:
    """Sort distinct algebraic numbers, refining until enclosures are disjoint."""
    roots = list(roots)
    changed = True
    while changed:
        changed = False
        roots.sort(key=lambda r: (r.lo, r.hi))
        for i in range(len(roots) - 1):
            a, b = roots[i], roots[i + 1]
            if a.hi >= b.lo:
                w = max(a.width, b.width) / 4
                roots[i] = a.refine(w) if a.width > 0 else a
                roots[i + 1] = b.refine(w) if b.width > 0 else b
                changed = True
    return roots


# ---------------------------------------------------------------------------
# exact comparison of algebraic numbers
# ---------------------------------------------------------------------------


def algebraic_equal(x: IsolatedRoot, y: IsolatedRoot) -> bool:
    lo, hi = max(x.lo, y.lo), min(x.hi, y.hi)
    if lo > hi:
        return False
    if x.is_exact and y.is_exact:
        return x.lo == y.lo
    if x.is_exact:
        return y.poly(x.lo) == 0
    if y.is_exact:
        return x.poly(y.lo) == 0
    g = poly_gcd(x.poly, y.poly)
    return g.degree > 0 and count_roots(g, lo, hi) > 0


def algebraic_cmp(x: IsolatedRoot, y: IsolatedRoot) -> int:
    """Exact three-way comparison of two real algebraic numbers."""
    if algebraic_equal(x, y):
        return 0
    while not (x.hi < y.lo or y.hi < x.lo):
        w = max(x.width, y.width) / 4
        x, y = x.refine(w), y.refine(w)
    return -1 if x.hi < y.lo else 1


def cmp_rational(x: IsolatedRoot, q) -> int:
    q = Fraction(q)
    if x.is_exact:
        return _sign(x.lo - q)
    if x.poly(q) == 0 and x.lo <= q <= x.hi:
        return 0
    while x.lo <= q <= x.hi:
        x = x.refine(x.width / 4)
    return 1 if x.lo > q else -1


def as_algebraic(v) -> IsolatedRoot:
    if isinstance(v, IsolatedRoot):
        return v
    return IsolatedRoot.rational(Fraction(v))


def sign_at(p: Polynomial, x: IsolatedRoot) -> int:
    """Exact sign of the polynomial ``p`` at the algebraic number ``x``."""
    if x.is_exact:
        return _sign(p(x.lo))
    if p.is_zero():
        return 0
    g = poly_gcd(p, x.poly)
    if g.degree > 0 and count_roots(g, x.lo, x.hi) > 0:
        return 0
    # p has no root equal to x; shrink until p has no root in the enclosure
    seq = sturm_sequence(squarefree_part(p))
    while count_roots(p, x.lo, x.hi, seq) > 0:
        x = x.refine(x.width / 4)
    return _sign(p(x.midpoint))


# ---------------------------------------------------------------------------
# interval evaluation
# ---------------------------------------------------------------------------


def _imul(a, b):
    ps = (a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1])
    return min(ps), max(ps)


def poly_range(p: Polynomial, lo: Fraction, hi: Fraction) -> tuple[Fraction, Fraction]:
    """Outer enclosure of p([lo, hi]) by interval Horner evaluation."""
    acc = (Fraction(0), Fraction(0))
    for c in reversed(p.coeffs):
        acc = _imul(acc, (lo, hi))
        acc = (acc[0] + c, acc[1] + c)
    return acc


def ratfunc_range(R: RationalFunction, lo: Fraction, hi: Fraction) -> Optional[tuple[Fraction, Fraction]]:
    n = poly_range(R.num, lo, hi)
    d = poly_range(R.den, lo, hi)
    if d[0] <= 0 <= d[1]:
        return None
    inv = (1 / d[1], 1 / d[0])
    return _imul(n, inv)


def enclose_image(R: RationalFunction, x: IsolatedRoot, width) -> tuple[Fraction, Fraction]:
    """Rational enclosure of R(x) narrower than ``width``."""
    width = Fraction(width)
    if x.is_exact:
        v = R(x.lo)
        return v, v
    w = x.width
    while True:
        x = x.refine(w)
        rng = ratfunc_range(R, x.lo, x.hi)
        if rng is not None and rng[1] - rng[0] <= width:
            return rng
        w = x.width / 16


def image_cmp(R: RationalFunction, x: IsolatedRoot, y: IsolatedRoot) -> int:
    """Exact sign of R(x) - y for algebraic x, y (x not a pole of R)."""
    if y.is_exact:
        num = R.num - y.lo * R.den
        return sign_at(num, x) * sign_at(R.den, x)
    # R(x) == y iff x is a root of the numerator of F(R) and R(x) lies in y's enclosure
    F = RationalFunction(y.poly).compose(R).num
    if sign_at(F, x) == 0:
        w = y.width
        while True:
            lo, hi = enclose_image(R, x, w)
            if y.lo <= lo and hi <= y.hi:
                return 0
            if hi < y.lo or lo > y.hi:
                break
            w = w / 4
    # distinct numbers: refine both sides until separated
    w = y.width
    while True:
        lo, hi = enclose_image(R, x, w)
        if hi < y.lo:
            return -1
        if lo > y.hi:
            return 1
        w = w / 4
        y = y.refine(w)


# ---------------------------------------------------------------------------
# preimages and images of algebraic numbers under a rational map
# ---------------------------------------------------------------------------


def _inverse_mod(a: Polynomial, m: Polynomial) -> Polynomial:
    """Inverse of ``a`` modulo ``m`` by the extended Euclidean algorithm."""
    r0, r1 = m, a % m
    s0, s1 = Polynomial(), Polynomial.constant(1)
    while not r1.is_zero():
        q, r = divmod(r0, r1)
        r0, r1 = r1, r
        s0, s1 = s1, s0 - q * s1
    if r0.degree != 0:
        raise ArithmeticError("not invertible modulo the defining polynomial")
    return s0 * (1 / r0.lc)


def preimages(R: RationalFunction, y) -> list[IsolatedRoot]:
    """All real x with R(x) = y, for rational or algebraic y."""
    y = as_algebraic(y)
    if y.is_exact:
        return isolate_real_roots(R.num - R.den * y.lo)
    F = RationalFunction(y.poly).compose(R).num
    return [x for x in isolate_real_roots(F) if image_cmp(R, x, y) == 0]


def image_root(R: RationalFunction, x: IsolatedRoot) -> IsolatedRoot:
    """R(x) as an isolated root of an explicit polynomial.

    The polynomial is the characteristic polynomial of multiplication by
    R(x) on Q[t]/(p) with p the defining polynomial of x.
    """
    from .linalg import charpoly

    x = as_algebraic(x)
    if x.is_exact:
        return IsolatedRoot.rational(R(x.lo))
    p = x.poly
    d = p.degree
    y = (R.num * _inverse_mod(R.den, p)) % p
    cols = []
    cur = Polynomial.constant(1)
    basis = []
    for _ in range(d):
        basis.append(cur)
        cur = (cur * Polynomial.x()) % p
    for e in basis:
        prod = (e * y) % p
        cols.append([prod.coeffs[i] if i < len(prod.coeffs) else Fraction(0) for i in range(d)])
    mat = [[cols[j][i] for j in range(d)] for i in range(d)]
    cands = isolate_real_roots(charpoly(mat))
    w = max((c.width for c in cands), default=Fraction(1))
    while True:
        lo, hi = enclose_image(R, x, w)
        hits = [c for c in cands if not (c.hi < lo or c.lo > hi)]
        if len(hits) == 1:
            return IsolatedRoot(hits[0].poly, hits[0].lo, hits[0].hi)
        if not hits:
            raise ArithmeticError("image enclosure missed every candidate root")
        w /= 16
        cands = [c.refine(w) if c.width > 0 else c for c in cands]
