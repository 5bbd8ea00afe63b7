"""Exact univariate polynomials and rational functions over Q."""

from __future__ import annotations

from fractions import Fraction
from math import gcd as igcd
from typing import Iterable, Sequence, Union

Number = Union[int, Fraction]


class PoleError(ZeroDivisionError):
    """Raised when a rational function is evaluated at a root of its denominator."""


def _frac(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


class Polynomial:
    """Polynomial with exact rational coefficients, stored in ascending degree.

    The zero polynomial has an empty coefficient tuple and degree -1.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable = ()):
        c = [_frac(x) for x in coeffs]
        while c and c[-1] == 0:
            c.pop()
        self.coeffs: tuple[Fraction, ...] = tuple(c)

    @classmethod
    def _from_list(cls, c: list) -> "Polynomial":
        # trusted constructor: entries are already Fractions
        while c and c[-1] == 0:
            c.pop()
        p = cls.__new__(cls)
        p.coeffs = tuple(c)
        return p

    @classmethod
    def x(cls) -> "Polynomial":
        return cls._from_list([Fraction(0), Fraction(1)])

    @classmethod
    def constant(cls, c: Number) -> "Polynomial":
        return cls([c])

    @classmethod
    def from_roots(cls, roots: Iterable[Number]) -> "Polynomial":
        p = cls.constant(1)
        for r in roots:
            p = p * cls([-_frac(r), 1])
        return p

    # -- basic properties -------------------------------------------------
    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def lc(self) -> Fraction:
        return self.coeffs[-1] if self.coeffs else Fraction(0)

    def is_zero(self) -> bool:
        return not self.coeffs

    def __bool__(self) -> bool:
        return bool(self.coeffs)

    def __eq__(self, other) -> bool:
        if isinstance(other, Polynomial):
            return self.coeffs == other.coeffs
        if isinstance(other, (int, Fraction)):
            return self.coeffs == Polynomial([other]).coeffs
        return NotImplemented

    def __hash__(self) -> int:
        return hash(("Polynomial", self.coeffs))

    def __repr__(self) -> str:
        return f"Polynomial({[str(c) for c in self.coeffs]})"

    def __str__(self) -> str:
        if not self.coeffs:
            return "0"
        terms = []
        for k in range(self.degree, -1, -1):
            c = self.coeffs[k]
            if c == 0:
                continue
            if k == 0:
                terms.append(str(c))
            else:
                coef = "" if c == 1 else "-" if c == -1 else f"{c}*"
                terms.append(f"{coef}z" + (f"^{k}" if k > 1 else ""))
        return " + ".join(terms).replace("+ -", "- ")

    # -- arithmetic --------------------------------------------------------
    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            return other
        if isinstance(other, (int, Fraction)):
            return Polynomial([other])
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        c = list(a)
        for i, v in enumerate(b):
            c[i] += v
        return Polynomial._from_list(c)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial._from_list([-v for v in self.coeffs])

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return Polynomial._from_list([v * other for v in self.coeffs])
        if not isinstance(other, Polynomial):
            return NotImplemented
        a, b = self.coeffs, other.coeffs
        if not a or not b:
            return Polynomial()
        c = [Fraction(0)] * (len(a) + len(b) - 1)
        for i, u in enumerate(a):
            if u == 0:
                continue
            for j, v in enumerate(b):
                c[i + j] += u * v
        return Polynomial._from_list(c)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "Polynomial":
        result = Polynomial.constant(1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __divmod__(self, other: "Polynomial"):
        other = self._coerce(other)
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        r = list(self.coeffs)
        db = other.degree
        lc = other.lc
        if len(r) - 1 < db:
            return Polynomial(), self
        q = [Fraction(0)] * (len(r) - db)
        bc = other.coeffs
        for k in range(len(r) - 1 - db, -1, -1):
            t = r[k + db] / lc
            q[k] = t
            if t:
                for j in range(db + 1):
                    r[k + j] -= t * bc[j]
        return Polynomial._from_list(q), Polynomial._from_list(r[:db])

    def __floordiv__(self, other):
        return divmod(self, other)[0]

    def __mod__(self, other):
        return divmod(self, other)[1]

    def exact_div(self, other: "Polynomial") -> "Polynomial":
        q, r = divmod(self, other)
        if r:
            raise ArithmeticError(f"{other} does not divide {self}")
        return q

    def monic(self) -> "Polynomial":
        if self.is_zero():
            return self
        return self * (1 / self.lc)

    def derivative(self) -> "Polynomial":
        return Polynomial._from_list([k * self.coeffs[k] for k in range(1, len(self.coeffs))])

    def __call__(self, x):
        acc = 0 * x if not isinstance(x, (int, Fraction)) else Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def eval_float(self, x: float) -> float:
        acc = 0.0
        for c in reversed(self.coeffs):
            acc = acc * x + float(c)
        return acc

    def compose(self, inner: "Polynomial") -> "Polynomial":
        acc = Polynomial()
        for c in reversed(self.coeffs):
            acc = acc * inner + c
        return acc

    def scale_shift(self, a: Number, b: Number) -> "Polynomial":
        """Return p(a*z + b)."""
        return self.compose(Polynomial([b, a]))

    # -- integer views -----------------------------------------------------
    def primitive_integer(self) -> list[int]:
        """Integer coefficients of a positive multiple with content 1."""
        if not self.coeffs:
            return []
        den = 1
        for c in self.coeffs:
            den = den * c.denominator // igcd(den, c.denominator)
        ints = [int(c * den) for c in self.coeffs]
        g = 0
        for v in ints:
            g = igcd(g, v)
        ints = [v // g for v in ints]
        if ints[-1] < 0:
            ints = [-v for v in ints]
        return ints

    def to_strings(self) -> list[str]:
        return [str(c) for c in self.coeffs]

    @classmethod
    def from_strings(cls, items: Sequence[str]) -> "Polynomial":
        return cls(Fraction(s) for s in items)


def poly_gcd(a: Polynomial, b: Polynomial) -> Polynomial:
    """Monic greatest common divisor (zero if both inputs are zero)."""
    while b:
        a, b = b, a % b
    return a.monic()


def poly_lcm(a: Polynomial, b: Polynomial) -> Polynomial:
    if a.is_zero() or b.is_zero():
        return Polynomial()
    return (a * b).exact_div(poly_gcd(a, b)).monic()


def squarefree_decomposition(p: Polynomial) -> list[tuple[Polynomial, int]]:
    """Yun's algorithm: monic square-free factors with their multiplicities."""
    if p.degree < 1:
        return []
    p = p.monic()
    dp = p.derivative()
    a = poly_gcd(p, dp)
    b = p.exact_div(a)
    c = dp.exact_div(a)
    d = c - b.derivative()
    out = []
    i = 1
    while b.degree > 0:
        a = poly_gcd(b, d)
        b = b.exact_div(a)
        c = d.exact_div(a)
        d = c - b.derivative()
        if a.degree > 0:
            out.append((a.monic(), i))
        i += 1
    return out


def squarefree_part(p: Polynomial) -> Polynomial:
    if p.degree < 1:
        return Polynomial.constant(1)
    return p.exact_div(poly_gcd(p, p.derivative())).monic()


class RationalFunction:
    """Ratio of polynomials in canonical form: coprime, monic denominator."""

    __slots__ = ("num", "den")

    def __init__(self, num, den=None, *, _canonical: bool = False):
        if not isinstance(num, Polynomial):
            num = Polynomial([num])
        if den is None:
            den = Polynomial.constant(1)
        elif not isinstance(den, Polynomial):
            den = Polynomial([den])
        if den.is_zero():
            raise ZeroDivisionError("zero denominator")
        if not _canonical:
            if num.is_zero():
                den = Polynomial.constant(1)
            else:
                g = poly_gcd(num, den)
                if g.degree > 0:
                    num = num.exact_div(g)
                    den = den.exact_div(g)
                lc = den.lc
                if lc != 1:
                    num = num * (1 / lc)
                    den = den * (1 / lc)
        self.num = num
        self.den = den

    @classmethod
    def constant(cls, c: Number) -> "RationalFunction":
        return cls(Polynomial([c]))

    @classmethod
    def z(cls) -> "RationalFunction":
        return cls(Polynomial.x())

    def normalize(self) -> "RationalFunction":
        return RationalFunction(self.num, self.den)

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_polynomial(self) -> bool:
        return self.den.degree == 0

    @property
    def degree(self) -> int:
        """Degree as a map of the Riemann sphere."""
        return max(self.num.degree, self.den.degree)

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction, Polynomial)):
            other = RationalFunction(other)
        if not isinstance(other, RationalFunction):
            return NotImplemented
        return self.num == other.num and self.den == other.den

    def __hash__(self) -> int:
        return hash((self.num, self.den))

    def __repr__(self) -> str:
        return f"RationalFunction(({self.num}) / ({self.den}))"

    def __str__(self) -> str:
        if self.den.degree == 0:
            return str(self.num)
        return f"({self.num}) / ({self.den})"

    def _coerce(self, other):
        if isinstance(other, RationalFunction):
            return other
        if isinstance(other, (int, Fraction, Polynomial)):
            return RationalFunction(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if self.den == other.den:
            return RationalFunction(self.num + other.num, self.den)
        return RationalFunction(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __neg__(self):
        return RationalFunction(-self.num, self.den, _canonical=True)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return RationalFunction(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if other.is_zero():
            raise ZeroDivisionError("division by the zero function")
        return RationalFunction(self.num * other.den, self.den * other.num)

    def __rtruediv__(self, other):
        return self._coerce(other) / self

    def __call__(self, x):
        d = self.den(x)
        if d == 0:
            raise PoleError(f"pole of {self} at {x}")
        return self.num(x) / d

    def eval_float(self, x: float) -> float:
        d = self.den.eval_float(x)
        if d == 0.0:
            raise PoleError(f"pole of {self} at {x}")
        return self.num.eval_float(x) / d

    def derivative(self) -> "RationalFunction":
        return RationalFunction(
            self.num.derivative() * self.den - self.num * self.den.derivative(),
            self.den * self.den,
        )

    def compose(self, inner: "RationalFunction") -> "RationalFunction":
        """Return self(inner(z))."""
        d = max(self.num.degree, self.den.degree, 0)

        def homog(p: Polynomial) -> Polynomial:
            acc = Polynomial()
            for k, c in enumerate(p.coeffs):
                if c:
                    acc = acc + c * inner.num**k * inner.den ** (d - k)
            return acc

        return RationalFunction(homog(self.num), homog(self.den))

    def to_json(self) -> dict:
        return {"numerator": self.num.to_strings(), "denominator": self.den.to_strings()}
