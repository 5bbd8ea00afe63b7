"""Spectral decimation data: S(z), phi, R, exceptional set and inverse branches.

The level-1 Laplacian is split as ``[[A, B], [C, D]]`` along V_0 and the
Schur complement ``S(z) = (1 - z) A - B (D - z)^{-1} C`` is formed exactly
over Q(z).  Full symmetry forces ``S(z) = phi(z) (M_0 - R(z))``, which
yields the decimation map R and the scalar phi.
"""

from __future__ import annotations

import functools
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import brentq

from .matrices import (
    BlockDecomposition,
    block_decompose,
    float_laplacian,
    laplacian_matrix,
    symmetrized,
)
from .ratfield import (
    IsolatedRoot,
    PoleError,
    Polynomial,
    RationalFunction,
    algebraic_cmp,
    algebraic_equal,
    as_algebraic,
    charpoly,
    cmp_rational,
    isolate_real_roots,
    matrix_inverse_ratfield,
)
from .ratfield.linalg import const_matrix
from .ratfield.roots import image_root, preimages
from .structure import FractalStructure, build_graph, validate_full_symmetry


class DecimationError(ValueError):
    pass


class NotFullySymmetricError(DecimationError):
    pass


class DegenerateStructureError(DecimationError):
    pass


class NonRealSpectrumError(DecimationError):
    pass


class ExceptionalValueError(DecimationError):
    pass


class CrossCheckError(RuntimeError):
    pass


FuncMatrix = list[list[RationalFunction]]


# ---------------------------------------------------------------------------
# Schur complement and extraction of phi, R
# ---------------------------------------------------------------------------


def schur_complement(blocks: BlockDecomposition) -> FuncMatrix:
    z = RationalFunction.z()
    A, B, C, D = (const_matrix(m) for m in (blocks.A, blocks.B, blocks.C, blocks.D))
    k, m = len(A), len(D)
    shifted = [[D[i][j] - z if i == j else D[i][j] for j in range(m)] for i in range(m)]
    inv = matrix_inverse_ratfield(shifted)
    # X = (D - z)^{-1} C, then S = (1 - z) A - B X
    X = [
        [sum((inv[i][t] * C[t][j] for t in range(m) if not C[t][j].is_zero()), RationalFunction.constant(0))
         for j in range(k)]
        for i in range(m)
    ]
    one_minus_z = 1 - z
    S = []
    for i in range(k):
        row = []
        for j in range(k):
            acc = one_minus_z * A[i][j]
            for t in range(m):
                if not B[i][t].is_zero():
                    acc = acc - B[i][t] * X[t][j]
            row.append(acc)
        S.append(row)
    return S


def level0_matrix(v0_size: int) -> list[list[Fraction]]:
    off = Fraction(-1, v0_size - 1)
    return [[Fraction(1) if i == j else off for j in range(v0_size)] for i in range(v0_size)]


def extract_phi_R(S: FuncMatrix, v0_size: int) -> tuple[RationalFunction, RationalFunction]:
    k = v0_size
    if len(S) != k or any(len(row) != k for row in S):
        raise DecimationError("Schur complement has the wrong shape")
    diag, off = S[0][0], S[0][1]
    for i in range(k):
        for j in range(k):
            if S[i][j] != (diag if i == j else off):
                raise NotFullySymmetricError(
                    "Schur complement is not of the form phi (M_0 - R); the structure is not fully symmetric"
                )
    phi = off * (-(k - 1))
    if phi.is_zero():
        raise DegenerateStructureError("phi vanishes identically")
    R = 1 - diag / phi
    M0 = level0_matrix(k)
    for i in range(k):
        for j in range(k):
            rhs = phi * (M0[i][j] - R) if i == j else phi * M0[i][j]
            if rhs != S[i][j]:
                raise DecimationError("identity S = phi (M_0 - R) failed")
    if R(Fraction(0)) != 0:
        raise DegenerateStructureError("R(0) != 0")
    if R.derivative()(Fraction(0)) <= 1:
        raise DegenerateStructureError("R'(0) <= 1: no renormalization")
    return phi, R


def _dedupe_sorted(points: Sequence[IsolatedRoot]) -> list[IsolatedRoot]:
    out: list[IsolatedRoot] = []
    for p in points:
        if not any(algebraic_equal(p, q) for q in out):
            out.append(p)
    return sorted(out, key=functools.cmp_to_key(algebraic_cmp))


def exceptional_set(blocks: BlockDecomposition, phi: RationalFunction) -> list[IsolatedRoot]:
    """sigma(D) together with the real zeros of phi, sorted; the last entry is b."""
    cp = charpoly(blocks.D)
    sigma_d = isolate_real_roots(cp)
    if sum(r.multiplicity for r in sigma_d) != cp.degree:
        raise NonRealSpectrumError("the D block has non-real eigenvalues")
    zeros = isolate_real_roots(phi.num) if phi.num.degree > 0 else []
    return _dedupe_sorted(list(sigma_d) + list(zeros))


# ---------------------------------------------------------------------------
# inverse branches
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class BranchDescriptor:
    """A monotone partial inverse of R.

    ``range`` is the interval of z the branch returns; ``domain`` is the
    interval of values y it accepts, so R maps ``range`` onto ``domain``.
    """

    index: int
    domain: tuple[IsolatedRoot, IsolatedRoot]
    range: tuple[IsolatedRoot, IsolatedRoot]
    increasing: bool
    R: RationalFunction = field(repr=False)
    full: bool = True  # domain equals [0, b]

    @functools.cached_property
    def _float_range(self) -> tuple[float, float]:
        return float(self.range[0]), float(self.range[1])

    @functools.cached_property
    def _tight_range(self) -> tuple[IsolatedRoot, IsolatedRoot]:
        # isolation enclosures can be coarse; the rational bounds need tight ones
        return tuple(e.refine(Fraction(1, 2**200)) for e in self.range)

    @functools.cached_property
    def _float_domain(self) -> tuple[float, float]:
        return float(self.domain[0]), float(self.domain[1])

    def __call__(self, y: float) -> float:
        """phi_j(y) in floating point; y is clipped to the domain."""
        lo, hi = self._float_range
        dlo, dhi = self._float_domain
        if y <= dlo:
            return lo if self.increasing else hi
        if y >= dhi:
            return hi if self.increasing else lo
        R = self.R

        def f(t):
            return R.eval_float(t) - y

        flo, fhi = f(lo), f(hi)
        if flo == 0:
            return lo
        if fhi == 0:
            return hi
        if (flo > 0) == (fhi > 0):
            # y within rounding of a domain end
            return lo if abs(flo) < abs(fhi) else hi
        return brentq(f, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)

    def bisect(self, y: float, iterations: int = 50) -> float:
        """Plain bisection variant of ``__call__`` with a fixed iteration count."""
        lo, hi = self._float_range
        sign = 1 if self.increasing else -1
        for _ in range(iterations):
            mid = (lo + hi) / 2
            if sign * (self.R.eval_float(mid) - y) < 0:
                lo = mid
            else:
                hi = mid
        return (lo + hi) / 2

    def _accepts(self, t: Fraction, y: Fraction, below: bool) -> bool:
        """Is t certainly on the requested side of phi_j(y)?"""
        rlo, rhi = self._tight_range
        if below:
            if t <= rlo.lo:
                return True
            if t > rhi.lo:
                return False
        else:
            if t >= rhi.hi:
                return True
            if t < rlo.hi:
                return False
        try:
            v = self.R(t)
        except PoleError:
            return False
        # increasing: t <= phi(y) iff R(t) <= y
        return (v <= y) if (below == self.increasing) else (v >= y)

    def bound(self, y: Fraction, below: bool) -> Fraction:
        """Rational lower (``below``) or upper bound of phi_j(y) for rational y.

        Outside the domain the bound is clipped to the corresponding end of the
        range, so the result always encloses phi_j(y clipped to the domain).
        """
        y = Fraction(y)
        g = self(float(y))
        rlo, rhi = self._tight_range
        t = Fraction(g)
        t = min(t, rhi.lo) if below else max(t, rlo.hi)
        step = Fraction(abs(g)) * Fraction(1, 2**50) if g != 0 else Fraction(1, 2**60)
        step = max(step, Fraction(1, 2**1000))
        while not self._accepts(t, y, below):
            t = t - step if below else t + step
            step *= 2
        return t

    def enclose(self, ylo: Fraction, yhi: Fraction) -> tuple[Fraction, Fraction]:
        """Rational interval containing phi_j([ylo, yhi] intersected with the domain)."""
        if self.increasing:
            return self.bound(ylo, True), self.bound(yhi, False)
        return self.bound(yhi, True), self.bound(ylo, False)

    def range_value_at(self, domain_end: int) -> IsolatedRoot:
        """Range endpoint that the given domain endpoint (0 = low, 1 = high) maps to."""
        return self.range[domain_end] if self.increasing else self.range[1 - domain_end]

    def to_json(self, digits: int = 12) -> dict:
        return {
            "index": self.index,
            "increasing": self.increasing,
            "full_domain": self.full,
            "domain": [e.to_json(digits) for e in self.domain],
            "range": [e.to_json(digits) for e in self.range],
        }


@dataclass(frozen=True)
class _Breakpoint:
    point: IsolatedRoot
    value: Optional[int]  # 0 if R = 0 there, 1 if R = b, None otherwise
    pole: bool


def _rational_between(a: IsolatedRoot, b: IsolatedRoot) -> Fraction:
    while not a.hi < b.lo:
        w = max(a.width, b.width) / 4
        a, b = a.refine(w), b.refine(w)
    return (a.hi + b.lo) / 2


def preimage_breakpoints(R: RationalFunction, b) -> list[_Breakpoint]:
    """Sorted real points where R hits 0 or b, turns, or has a pole."""
    b = as_algebraic(b)
    tagged: list[tuple[IsolatedRoot, Optional[int], bool]] = []
    tagged += [(p, 0, False) for p in preimages(R, 0)]
    tagged += [(p, 1, False) for p in preimages(R, b)]
    dnum = R.derivative().num
    if dnum.degree > 0:
        tagged += [(p, None, False) for p in isolate_real_roots(dnum)]
    if R.den.degree > 0:
        tagged += [(p, None, True) for p in isolate_real_roots(R.den)]
    merged: list[_Breakpoint] = []
    for p, val, pole in tagged:
        for i, q in enumerate(merged):
            if algebraic_equal(p, q.point):
                merged[i] = _Breakpoint(q.point, q.value if q.value is not None else val, q.pole or pole)
                break
        else:
            merged.append(_Breakpoint(p, val, pole))
    return sorted(merged, key=functools.cmp_to_key(lambda u, v: algebraic_cmp(u.point, v.point)))


def partial_inverses(R: RationalFunction, b) -> list[BranchDescriptor]:
    """Monotone inverse branches of R over [0, b], ordered left to right.

    Every monotone piece of R^{-1}([0, b]) gives one branch; pieces whose
    image is a proper subinterval (a critical value inside (0, b)) are marked
    ``full=False``.  The branch with 0 in its range gets index 0.
    """
    b = as_algebraic(b)
    zero = IsolatedRoot.rational(0)
    bps = preimage_breakpoints(R, b)
    if not bps:
        return []
    # R is monotone and pole-free between consecutive breakpoints
    samples = [bps[0].point.lo - 1] + [
        _rational_between(bps[i].point, bps[i + 1].point) for i in range(len(bps) - 1)
    ] + [bps[-1].point.hi + 1]

    def inside(t: Fraction) -> bool:
        v = R(t)
        return v >= 0 and cmp_rational(b, v) >= 0

    if inside(samples[0]) or inside(samples[-1]):
        raise DecimationError("R^{-1}[0, b] is unbounded")
    branches = []
    for i in range(len(bps) - 1):
        left, right = bps[i], bps[i + 1]
        if left.pole or right.pole or not inside(samples[i + 1]):
            continue
        ends = []
        for bp in (left, right):
            if bp.value == 0:
                ends.append(zero)
            elif bp.value == 1:
                ends.append(b)
            else:
                ends.append(image_root(R, bp.point))
        increasing = algebraic_cmp(ends[0], ends[1]) < 0
        dom = (ends[0], ends[1]) if increasing else (ends[1], ends[0])
        full = algebraic_equal(dom[0], zero) and algebraic_equal(dom[1], b)
        branches.append((left.point, right.point, dom, increasing, full))
    start = next(
        (k for k, br in enumerate(branches) if cmp_rational(br[0], 0) <= 0 <= cmp_rational(br[1], 0)),
        None,
    )
    if start is None:
        raise DecimationError("no inverse branch has 0 in its range")
    if start != 0:
        raise DecimationError("an inverse branch lies left of 0")
    return [
        BranchDescriptor(k, dom, (lo, hi), inc, R, full)
        for k, (lo, hi, dom, inc, full) in enumerate(branches)
    ]


def containment_holds(R: RationalFunction, b) -> bool:
    """Exact test of R^{-1}([0, b]) being a subset of [0, b].

    Both ends of every component of R^{-1}([0, b]) solve R = 0 or R = b, so
    it suffices that all those real solutions lie in [0, b].
    """
    b = as_algebraic(b)
    for y in (IsolatedRoot.rational(0), b):
        for x in preimages(R, y):
            if cmp_rational(x, 0) < 0 or algebraic_cmp(x, b) > 0:
                return False
    return True


# ---------------------------------------------------------------------------
# decimation data and dimensions
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class DecimationData:
    R: RationalFunction
    phi: RationalFunction
    L: int  # degree of R
    exceptional_set: tuple[IsolatedRoot, ...]
    c_delta: Fraction
    branches: tuple[BranchDescriptor, ...]
    b: IsolatedRoot
    sigma_D: tuple[IsolatedRoot, ...] = ()
    v0_size: int = 2
    num_cells: int = 2
    name: str = ""

    @property
    def min_exceptional(self) -> float:
        return float(self.exceptional_set[0])

    def exceptional_floats(self) -> np.ndarray:
        return np.array([float(e) for e in self.exceptional_set])

    def level0_spectrum(self) -> list[tuple[Fraction, int]]:
        """sigma(Delta_0) for the complete graph K_{|V_0|}."""
        k = self.v0_size
        return [(Fraction(0), 1), (Fraction(k, k - 1), k - 1)]

    def branches_over(self, b) -> list[BranchDescriptor]:
        return partial_inverses(self.R, b)

    def to_json(self, digits: int = 12) -> dict:
        return {
            "R": self.R.to_json(),
            "phi": self.phi.to_json(),
            "degree_R": self.L,
            "c_delta": str(self.c_delta),
            "exceptional_set": [e.to_json(digits) for e in self.exceptional_set],
            "sigma_D": [e.to_json(digits) for e in self.sigma_D],
            "b": self.b.to_json(digits),
            "branches": [br.to_json(digits) for br in self.branches],
        }


def decimate(structure: FractalStructure, require_symmetry: bool = True) -> DecimationData:
    """Run the symbolic pipeline on a structure."""
    if require_symmetry:
        report = validate_full_symmetry(structure)
        if not report.admits_decimation:
            raise NotFullySymmetricError(
                f"{structure.name}: no doubly transitive symmetry on the boundary"
            )
    blocks = block_decompose(laplacian_matrix(build_graph(structure, 1)))
    S = schur_complement(blocks)
    phi, R = extract_phi_R(S, structure.boundary_size)
    ex = exceptional_set(blocks, phi)
    if not ex:
        raise DegenerateStructureError("empty exceptional set")
    if cmp_rational(ex[0], 0) <= 0:
        raise DegenerateStructureError("exceptional set must be positive")
    sigma_d = isolate_real_roots(charpoly(blocks.D))
    b = ex[-1]
    return DecimationData(
        R=R,
        phi=phi,
        L=R.degree,
        exceptional_set=tuple(ex),
        c_delta=R.derivative()(Fraction(0)),
        branches=tuple(partial_inverses(R, b)),
        b=b,
        sigma_D=tuple(sigma_d),
        v0_size=structure.boundary_size,
        num_cells=structure.num_cells,
        name=structure.name,
    )


@dataclass(frozen=True)
class DimensionReport:
    N: int
    c: Fraction
    r: Fraction
    d_R: float
    d_S: float
    regular: bool

    def to_json(self) -> dict:
        return {
            "N": self.N,
            "c": str(self.c),
            "r": str(self.r),
            "d_R": self.d_R,
            "d_S": self.d_S,
            "regular": self.regular,
        }


def dimension_report(dec: DecimationData, structure: Optional[FractalStructure] = None) -> DimensionReport:
    N = structure.num_cells if structure is not None else dec.num_cells
    c = dec.c_delta / N
    r = Fraction(N) / dec.c_delta
    d_R = math.log(N) / math.log(c) if c > 1 else math.inf
    d_S = 2 * math.log(N) / math.log(N * c)
    return DimensionReport(N, c, r, d_R, d_S, r < 1)


# ---------------------------------------------------------------------------
# per-level spectra from the dense oracle
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SpectrumEntry:
    value: float
    multiplicity: int
    exact: Optional[Fraction] = None
    seed: Optional[float] = None
    birth_level: Optional[int] = None
    word: Optional[tuple[int, ...]] = None
    exceptional: bool = False

    @property
    def provenance(self) -> str:
        if self.exceptional:
            return "exceptional"
        if self.word is None:
            return "unassigned"
        return f"i={self.birth_level};seed={self.seed:.12g};w={''.join(map(str, self.word)) or '-'}"


@dataclass(frozen=True)
class LevelSpectrum:
    level: int
    entries: tuple[SpectrumEntry, ...]
    dirichlet: bool = False

    @property
    def total_multiplicity(self) -> int:
        return sum(e.multiplicity for e in self.entries)

    def values(self) -> np.ndarray:
        return np.array([e.value for e in self.entries])

    def expanded(self) -> np.ndarray:
        return np.repeat(self.values(), [e.multiplicity for e in self.entries])


def cluster_eigenvalues(vals: np.ndarray, tol: float = 1e-9) -> list[tuple[float, int]]:
    vals = np.sort(np.asarray(vals, dtype=float))
    groups: list[list[float]] = []
    for v in vals:
        if groups and v - groups[-1][-1] <= tol:
            groups[-1].append(v)
        else:
            groups.append([v])
    return [(float(np.mean(g)), len(g)) for g in groups]


def _integer_rank(rows: list[list[Fraction]]) -> int:
    """Exact rank via fraction-free elimination on an integer matrix."""
    den = 1
    for row in rows:
        for v in row:
            den = math.lcm(den, v.denominator)
    a = [[int(v * den) for v in row] for row in rows]
    n, m = len(a), len(a[0]) if a else 0
    rank, prev = 0, 1
    for col in range(m):
        piv = next((r for r in range(rank, n) if a[r][col]), None)
        if piv is None:
            continue
        a[rank], a[piv] = a[piv], a[rank]
        p = a[rank][col]
        for r in range(rank + 1, n):
            f = a[r][col]
            a[r] = [(p * a[r][c] - f * a[rank][c]) // prev for c in range(m)]
        prev = p
        rank += 1
    return rank


def recognize_rational(entries: tuple[tuple[Fraction, ...], ...], value: float, multiplicity: int,
                       max_den: int = 1000) -> Optional[Fraction]:
    """Confirm an eigenvalue as an exact rational with the given multiplicity."""
    q = Fraction(value).limit_denominator(max_den)
    if abs(float(q) - value) > 1e-9:
        return None
    shifted = [[v - q if i == j else v for j, v in enumerate(row)] for i, row in enumerate(entries)]
    nullity = len(entries) - _integer_rank(shifted)
    return q if nullity == multiplicity else None


@functools.lru_cache(maxsize=64)
def _oracle_eigenvalues(structure: FractalStructure, n: int, dirichlet: bool) -> np.ndarray:
    g = build_graph(structure, n)
    M, deg, order = float_laplacian(g)
    S = symmetrized(M, deg)
    if dirichlet:
        pos = {v: i for i, v in enumerate(order)}
        drop = {pos[v] for v in g.boundary_ids}
        keep = [i for i in range(len(order)) if i not in drop]
        S = S[np.ix_(keep, keep)]
    vals = np.linalg.eigvalsh(S)
    vals.setflags(write=False)
    return vals


def oracle_eigenvalues(structure: FractalStructure, n: int, dirichlet: bool = False) -> np.ndarray:
    """All eigenvalues of M_n (with multiplicity) by a dense symmetric eigensolve."""
    return _oracle_eigenvalues(structure, n, dirichlet)


def _branch_of(branches: Sequence[BranchDescriptor], z: float, tol: float) -> Optional[int]:
    best, best_d = None, math.inf
    for br in branches:
        lo, hi = br._float_range
        d = max(lo - z, z - hi, 0.0)
        if d < best_d:
            best, best_d = br.index, d
    return best if best_d <= tol else None


def assign_provenance(dec: DecimationData, z: float, n: int, branches: Sequence[BranchDescriptor],
                      tol: float = 1e-6) -> dict:
    """Trace z forward under R to a seed in E or sigma(Delta_0)."""
    ex = dec.exceptional_floats()
    seeds0 = np.array([float(v) for v, _ in dec.level0_spectrum()])
    if n > 0 and np.min(np.abs(ex - z)) <= tol:
        return {"exceptional": True}
    word = []
    cur = z
    for k in range(n + 1):
        if k == n:
            if np.min(np.abs(seeds0 - cur)) > tol:
                return {}
            seed = float(seeds0[np.argmin(np.abs(seeds0 - cur))])
            return {"seed": seed, "birth_level": 0, "word": tuple(word)}
        if k > 0 and np.min(np.abs(ex - cur)) <= tol:
            seed = float(ex[np.argmin(np.abs(ex - cur))])
            return {"seed": seed, "birth_level": n - k, "word": tuple(word)}
        j = _branch_of(branches, cur, tol)
        if j is None:
            return {}
        word.append(j)
        cur = dec.R.eval_float(cur)
    return {}


def provenance_branches(dec: DecimationData) -> list[BranchDescriptor]:
    """Branches over [0, b'] with b' covering both E and sigma(Delta_0)."""
    top = max(dec.level0_spectrum()[-1][0], Fraction(0))
    if cmp_rational(dec.b, top) >= 0:
        return list(dec.branches)
    return partial_inverses(dec.R, top)


def level_spectrum(structure: FractalStructure, dec: Optional[DecimationData], n: int,
                   dirichlet: bool = False, cluster_tol: float = 1e-9,
                   cross_check: bool = True) -> LevelSpectrum:
    if n < 0:
        raise ValueError("level must be non-negative")
    vals = oracle_eigenvalues(structure, n, dirichlet)
    groups = cluster_eigenvalues(vals, cluster_tol)
    expected_size = len(vals)
    if sum(m for _, m in groups) != expected_size:
        raise CrossCheckError("multiplicities do not add up to the matrix size")

    if dec is not None and cross_check and not dirichlet and n >= 1:
        prev = oracle_eigenvalues(structure, n - 1, False)
        check_decimation(dec, [v for v, _ in groups], prev)

    entries_exact = None
    if expected_size <= 50:
        g = build_graph(structure, n)
        entries_exact = laplacian_matrix(g).entries
        if dirichlet:
            order = laplacian_matrix(g).ordering
            drop = set(g.boundary_ids)
            keep = [i for i, v in enumerate(order) if v not in drop]
            entries_exact = tuple(tuple(entries_exact[i][j] for j in keep) for i in keep)

    branches = provenance_branches(dec) if dec is not None and not dirichlet else []
    out = []
    for v, m in groups:
        exact = recognize_rational(entries_exact, v, m) if entries_exact is not None else None
        prov = assign_provenance(dec, v, n, branches) if branches else {}
        out.append(SpectrumEntry(
            value=float(exact) if exact is not None else v,
            multiplicity=m,
            exact=exact,
            seed=prov.get("seed"),
            birth_level=prov.get("birth_level"),
            word=prov.get("word"),
            exceptional=prov.get("exceptional", False),
        ))
    return LevelSpectrum(n, tuple(out), dirichlet)


def check_decimation(dec: DecimationData, values: Sequence[float], prev_spectrum: np.ndarray,
                     ex_tol: float = 1e-6, match_tol: float = 1e-8) -> int:
    """Every z away from E must map under R into the previous spectrum.

    Returns the number of values checked; raises on a violation.
    """
    ex = dec.exceptional_floats()
    prev = np.asarray(prev_spectrum)
    checked = 0
    for z in values:
        if np.min(np.abs(ex - z)) <= ex_tol:
            continue
        rz = dec.R.eval_float(z)
        if np.min(np.abs(prev - rz)) > match_tol:
            raise CrossCheckError(f"R({z:.15g}) = {rz:.15g} is not an eigenvalue of the previous level")
        checked += 1
    return checked


# ---------------------------------------------------------------------------
# eigenvector extension
# ---------------------------------------------------------------------------


def extend_eigenvector(blocks: BlockDecomposition, v_prev: Sequence[float], z: float,
                       tol: float = 1e-8) -> np.ndarray:
    """Stack v_prev with -(D - z)^{-1} C v_prev."""
    C = np.array([[float(x) for x in row] for row in blocks.C])
    D = np.array([[float(x) for x in row] for row in blocks.D])
    sig = np.linalg.eigvals(D).real
    if np.min(np.abs(sig - z)) <= tol:
        raise ExceptionalValueError(f"z = {z} lies in the spectrum of the D block")
    v = np.asarray(v_prev, dtype=float)
    tail = -np.linalg.solve(D - z * np.eye(len(D)), C @ v)
    return np.concatenate([v, tail])


# ---------------------------------------------------------------------------
# independent route: sampling and rational interpolation
# ---------------------------------------------------------------------------


def _solve_fraction(a: list[list[Fraction]], b: list[list[Fraction]]) -> list[list[Fraction]]:
    """Solve a x = b by Gauss-Jordan over Q; raises ZeroDivisionError if singular."""
    n = len(a)
    aug = [list(a[i]) + list(b[i]) for i in range(n)]
    for col in range(n):
        piv = next((r for r in range(col, n) if aug[r][col] != 0), None)
        if piv is None:
            raise ZeroDivisionError("singular sample")
        aug[col], aug[piv] = aug[piv], aug[col]
        p = aug[col][col]
        aug[col] = [v / p for v in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[col])]
    return [row[n:] for row in aug]


def _nullspace(rows: list[list[Fraction]], ncols: int) -> list[list[Fraction]]:
    a = [list(r) for r in rows]
    pivots = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(a)) if a[i][c] != 0), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        p = a[r][c]
        a[r] = [v / p for v in a[r]]
        for i in range(len(a)):
            if i != r and a[i][c] != 0:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for fcol in free:
        v = [Fraction(0)] * ncols
        v[fcol] = Fraction(1)
        for i, pc in enumerate(pivots):
            v[pc] = -a[i][fcol]
        basis.append(v)
    return basis


def _fit_rational(samples: list[tuple[Fraction, Fraction]], max_total: int) -> RationalFunction:
    """Lowest-degree p/q through all (x, y) samples."""
    for total in range(max_total + 1):
        for dq in range(total + 1):
            dp = total - dq
            ncols = dp + 1 + dq + 1
            if len(samples) < ncols + 2:
                continue
            rows = [
                [x**i for i in range(dp + 1)] + [-y * x**i for i in range(dq + 1)]
                for x, y in samples
            ]
            ns = _nullspace(rows, ncols)
            if len(ns) != 1:
                continue
            v = ns[0]
            q = Polynomial(v[dp + 1:])
            if q.is_zero():
                continue
            return RationalFunction(Polynomial(v[: dp + 1]), q)
    raise ArithmeticError("no rational function of bounded degree fits the samples")


def interpolation_oracle(structure: FractalStructure, seed: int = 0) -> tuple[RationalFunction, RationalFunction]:
    """Recover phi and R from exact point samples of S(z0).

    Independent of the function-field inverse: each sample solves
    ``(D - z0) X = C`` over Q and forms ``S(z0)`` directly.
    """
    blocks = block_decompose(laplacian_matrix(build_graph(structure, 1)))
    A, B, C, D = blocks.A, blocks.B, blocks.C, blocks.D
    m = len(D)
    deg = m + 1
    need = 2 * deg + 5
    rng = random.Random(seed)
    s11: list[tuple[Fraction, Fraction]] = []
    s12: list[tuple[Fraction, Fraction]] = []
    used = set()
    while len(s11) < need:
        z0 = Fraction(rng.randint(-400, 400), rng.randint(1, 97))
        if z0 in used:
            continue
        used.add(z0)
        shifted = [[D[i][j] - (z0 if i == j else 0) for j in range(m)] for i in range(m)]
        try:
            X = _solve_fraction(shifted, [list(r[:2]) for r in C])
        except ZeroDivisionError:
            continue  # pole: resample
        S = [[(1 - z0) * A[i][j] - sum(B[i][t] * X[t][j] for t in range(m)) for j in range(2)] for i in range(1)]
        s11.append((z0, S[0][0]))
        s12.append((z0, S[0][1]))
    f11 = _fit_rational(s11, 2 * deg + 1)
    f12 = _fit_rational(s12, 2 * deg + 1)
    k = structure.boundary_size
    phi = f12 * (-(k - 1))
    R = 1 - f11 / phi
    return phi, R
