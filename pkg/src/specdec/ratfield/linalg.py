"""Fraction-free elimination over Q[z] and its lift to the field Q(z)."""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from .poly import Polynomial, RationalFunction, poly_lcm

PolyMatrix = list[list[Polynomial]]
FuncMatrix = list[list[RationalFunction]]


class SingularMatrixError(ArithmeticError):
    pass


def _bareiss_gauss_jordan(a: PolyMatrix, ncols_left: int) -> tuple[PolyMatrix, Polynomial, int]:
    """In-place one-step fraction-free Gauss-Jordan on the left ``ncols_left`` columns.

    On return the left block is ``d * I`` where ``d`` is the determinant of the
    row-permuted left block; ``swaps`` counts the row exchanges.
    """
    n = len(a)
    prev = Polynomial.constant(1)
    swaps = 0
    width = len(a[0]) if a else 0
    for k in range(ncols_left):
        piv = next((r for r in range(k, n) if a[r][k]), None)
        if piv is None:
            raise SingularMatrixError("matrix is singular")
        if piv != k:
            a[k], a[piv] = a[piv], a[k]
            swaps += 1
        akk = a[k][k]
        rowk = a[k]
        for i in range(n):
            if i == k:
                continue
            row = a[i]
            aik = row[k]
            if aik.is_zero():
                new = [(akk * row[j]) for j in range(width)]
            else:
                new = [(akk * row[j] - aik * rowk[j]) for j in range(width)]
            if prev.degree > 0 or prev.lc != 1:
                new = [e.exact_div(prev) for e in new]
            a[i] = new
        prev = akk
    return a, prev, swaps


def determinant(m: Sequence[Sequence[Polynomial]]) -> Polynomial:
    n = len(m)
    if n == 0:
        return Polynomial.constant(1)
    a = [list(row) for row in m]
    try:
        _, d, swaps = _bareiss_gauss_jordan(a, n)
    except SingularMatrixError:
        return Polynomial()
    return -d if swaps % 2 else d


def charpoly(m: Sequence[Sequence[Fraction]]) -> Polynomial:
    """det(z I - m) for an exact rational matrix."""
    n = len(m)
    z = Polynomial.x()
    rows = [
        [(z if i == j else Polynomial()) - Fraction(m[i][j]) for j in range(n)]
        for i in range(n)
    ]
    return determinant(rows)


def adjugate_inverse(m: Sequence[Sequence[Polynomial]]) -> tuple[PolyMatrix, Polynomial]:
    """Return (adj, det) with m^{-1} = adj / det for a polynomial matrix."""
    n = len(m)
    one, zero = Polynomial.constant(1), Polynomial()
    a = [list(m[i]) + [one if i == j else zero for j in range(n)] for i in range(n)]
    a, d, swaps = _bareiss_gauss_jordan(a, n)
    adj = [row[n:] for row in a]
    # the left block ends as d*I, so the right block is d * m^{-1}
    return adj, d


def matrix_inverse_ratfield(m: Sequence[Sequence[RationalFunction]], verify: bool = True) -> FuncMatrix:
    """Exact inverse of a square matrix over Q(z).

    Denominators are cleared by their common multiple, the polynomial matrix is
    inverted by fraction-free elimination, and the result is optionally
    multiplied back to confirm the identity.
    """
    n = len(m)
    m = [[e if isinstance(e, RationalFunction) else RationalFunction(e) for e in row] for row in m]
    L = Polynomial.constant(1)
    for row in m:
        for e in row:
            L = poly_lcm(L, e.den)
    pm = [[e.num * L.exact_div(e.den) for e in row] for row in m]
    adj, d = adjugate_inverse(pm)
    inv = [[RationalFunction(adj[i][j] * L, d) for j in range(n)] for i in range(n)]
    if verify and not is_identity(matmul(m, inv)):
        raise ArithmeticError("inverse check failed")
    return inv


def matmul(a: FuncMatrix, b: FuncMatrix) -> FuncMatrix:
    n, k, p = len(a), len(b), len(b[0]) if b else 0
    out = []
    for i in range(n):
        row = []
        for j in range(p):
            acc = RationalFunction.constant(0)
            for t in range(k):
                if not a[i][t].is_zero() and not b[t][j].is_zero():
                    acc = acc + a[i][t] * b[t][j]
            row.append(acc)
        out.append(row)
    return out


def is_identity(m: FuncMatrix) -> bool:
    one = RationalFunction.constant(1)
    return all(
        (m[i][j] == one) if i == j else m[i][j].is_zero()
        for i in range(len(m))
        for j in range(len(m[i]))
    )


def const_matrix(m: Sequence[Sequence[Fraction]]) -> FuncMatrix:
    return [[RationalFunction(Fraction(v)) for v in row] for row in m]
