"""Real dynamics of the decimation map: hull, preimage covers, classification.

The Julia set of R is taken real and non-negative, so it is the
intersection of the nested sets R^{-n}([0, a]).  Depth-1 preimages are
computed with exact algebraic endpoints; deeper covers use certified
rational enclosures produced by the inverse branches.
"""

from __future__ import annotations

import enum
import functools
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .decimation import (
    BranchDescriptor,
    DecimationData,
    containment_holds,
    partial_inverses,
)
from .ratfield import (
    IsolatedRoot,
    RationalFunction,
    algebraic_cmp,
    algebraic_equal,
    as_algebraic,
    cmp_rational,
    image_cmp,
    isolate_real_roots,
)
from .ratfield.roots import preimages

ZERO = IsolatedRoot.rational(0)


class HullError(ValueError):
    pass


class CertificationError(RuntimeError):
    pass


def _sorted_unique(points: Sequence[IsolatedRoot]) -> list[IsolatedRoot]:
    out: list[IsolatedRoot] = []
    for p in points:
        if not any(algebraic_equal(p, q) for q in out):
            out.append(p)
    return sorted(out, key=functools.cmp_to_key(algebraic_cmp))


def hull_candidates(R: RationalFunction) -> list[IsolatedRoot]:
    """Largest real zero of R and largest real fixed point, ascending."""
    cands = []
    zeros = isolate_real_roots(R.num)
    if zeros:
        cands.append(zeros[-1])
    fixed = isolate_real_roots(R.num - R.den * R.num.x())
    if fixed:
        cands.append(fixed[-1])
    return _sorted_unique(cands)


def julia_hull(dec: DecimationData) -> IsolatedRoot:
    """Right end a of the convex hull [0, a] of the Julia set."""
    for b in hull_candidates(dec.R):
        if cmp_rational(b, 0) > 0 and containment_holds(dec.R, b):
            return b
    raise HullError("no candidate b satisfies R^{-1}[0, b] within [0, b]")


def derivative_is_one_at(R: RationalFunction, a: IsolatedRoot) -> bool:
    return image_cmp(R.derivative(), a, IsolatedRoot.rational(1)) == 0


# ---------------------------------------------------------------------------
# exact preimage of an interval
# ---------------------------------------------------------------------------


def _rational_between(a: IsolatedRoot, b: IsolatedRoot) -> Fraction:
    while not a.hi < b.lo:
        w = max(a.width, b.width) / 4
        a, b = a.refine(w), b.refine(w)
    return (a.hi + b.lo) / 2


def preimage_intervals(R: RationalFunction, lo, hi) -> list[tuple[IsolatedRoot, IsolatedRoot]]:
    """R^{-1}([lo, hi]) over the reals as sorted disjoint closed intervals.

    Pieces between consecutive breakpoints (solutions of R = lo, R = hi,
    critical points and poles) are tested at a rational sample; runs of
    included pieces and points are merged into components.
    """
    lo, hi = as_algebraic(lo), as_algebraic(hi)
    if algebraic_cmp(lo, hi) > 0:
        return []
    pts: list[tuple[IsolatedRoot, str]] = []
    pts += [(p, "in") for p in preimages(R, lo)]
    pts += [(p, "in") for p in preimages(R, hi)]
    dnum = R.derivative().num
    if dnum.degree > 0:
        pts += [(p, "crit") for p in isolate_real_roots(dnum)]
    if R.den.degree > 0:
        pts += [(p, "pole") for p in isolate_real_roots(R.den)]
    merged: list[list] = []
    for p, kind in pts:
        for m in merged:
            if algebraic_equal(p, m[0]):
                if kind == "pole" or m[1] == "pole":
                    m[1] = "pole"
                elif kind == "in":
                    m[1] = "in"
                break
        else:
            merged.append([p, kind])
    merged.sort(key=functools.cmp_to_key(lambda u, v: algebraic_cmp(u[0], v[0])))
    if not merged:
        return []

    def val_in(t: Fraction) -> bool:
        v = R(t)
        return cmp_rational(lo, v) <= 0 <= cmp_rational(hi, v)

    point_in = []
    for p, kind in merged:
        if kind == "in":
            point_in.append(True)
        elif kind == "pole":
            point_in.append(False)
        else:
            point_in.append(image_cmp(R, p, lo) >= 0 and image_cmp(R, p, hi) <= 0)
    first = merged[0][0].lo - 1
    last = merged[-1][0].hi + 1
    if (not merged[0][1] == "pole" and val_in(first)) or (not merged[-1][1] == "pole" and val_in(last)):
        raise ValueError("preimage is unbounded")
    piece_in = []
    for i in range(len(merged) - 1):
        if merged[i][1] == "pole" or merged[i + 1][1] == "pole":
            piece_in.append(False)
        else:
            piece_in.append(val_in(_rational_between(merged[i][0], merged[i + 1][0])))

    comps: list[tuple[IsolatedRoot, IsolatedRoot]] = []
    i = 0
    n = len(merged)
    while i < n:
        if not point_in[i]:
            i += 1
            continue
        start = i
        while i < n - 1 and piece_in[i]:
            i += 1
        comps.append((merged[start][0], merged[i][0]))
        i += 1
    return comps


# ---------------------------------------------------------------------------
# certified covers
# ---------------------------------------------------------------------------

_LABELS = ("zero", "top")


@dataclass(frozen=True)
class CoverInterval:
    """Closed interval whose endpoints lie in rational enclosures.

    ``lo_label``/``hi_label`` record endpoints known to equal 0 or the hull
    end a exactly.
    """

    lo: tuple[Fraction, Fraction]
    hi: tuple[Fraction, Fraction]
    lo_label: Optional[str] = None
    hi_label: Optional[str] = None

    @property
    def outer(self) -> tuple[Fraction, Fraction]:
        return self.lo[0], self.hi[1]

    @property
    def inner(self) -> tuple[Fraction, Fraction]:
        return self.lo[1], self.hi[0]

    @property
    def length_upper(self) -> Fraction:
        return self.hi[1] - self.lo[0]

    def float_bounds(self) -> tuple[float, float]:
        return float((self.lo[0] + self.lo[1]) / 2), float((self.hi[0] + self.hi[1]) / 2)

    def within(self, other: "CoverInterval") -> bool:
        """Enclosure-level containment, allowing coincident endpoints."""
        left = (self.lo_label is not None and self.lo_label == other.lo_label) or self.lo[1] >= other.lo[0]
        right = (self.hi_label is not None and self.hi_label == other.hi_label) or self.hi[0] <= other.hi[1]
        return left and right


@dataclass(frozen=True)
class IntervalCover:
    depth: int
    intervals: tuple[CoverInterval, ...]

    @property
    def max_length(self) -> Fraction:
        return max(iv.length_upper for iv in self.intervals)

    def nested_in(self, parent: "IntervalCover") -> bool:
        j = 0
        for iv in self.intervals:
            while j < len(parent.intervals) and not iv.within(parent.intervals[j]):
                if parent.intervals[j].hi[1] < iv.lo[0]:
                    j += 1
                else:
                    return False
            if j == len(parent.intervals):
                return False
        return True

    def disjoint_sorted(self) -> bool:
        return all(a.hi[1] < b.lo[0] for a, b in zip(self.intervals, self.intervals[1:]))

    def rows(self, digits: int = 12) -> list[tuple[int, str, str]]:
        return [
            (self.depth, f"{lo:.{digits}g}", f"{hi:.{digits}g}")
            for lo, hi in (iv.float_bounds() for iv in self.intervals)
        ]


def _encl(x: IsolatedRoot, width: Fraction) -> tuple[Fraction, Fraction]:
    r = x.refine(width)
    return r.lo, r.hi


@dataclass
class _CoverEngine:
    R: RationalFunction
    a: IsolatedRoot
    branches: list[BranchDescriptor]
    width: Fraction = Fraction(1, 2**80)
    a_encl: tuple[Fraction, Fraction] = field(init=False)

    def __post_init__(self):
        self.a_encl = _encl(self.a, self.width)
        self.range_labels = []
        for br in self.branches:
            labels = []
            for end in (0, 1):
                v = br.range_value_at(end)
                if algebraic_equal(v, ZERO):
                    labels.append("zero")
                elif algebraic_equal(v, self.a):
                    labels.append("top")
                else:
                    labels.append(None)
            self.range_labels.append(tuple(labels))
        self.domain_labels = []
        for br in self.branches:
            self.domain_labels.append(tuple(
                "zero" if algebraic_equal(d, ZERO) else "top" if algebraic_equal(d, self.a) else None
                for d in br.domain
            ))
        # adjacent branches sharing an endpoint: the shared point's domain value
        self.touch = []
        for j in range(len(self.branches) - 1):
            b0, b1 = self.branches[j], self.branches[j + 1]
            if algebraic_equal(b0.range[1], b1.range[0]):
                end = 1 if b0.increasing else 0
                self.touch.append(self.domain_labels[j][end])
            else:
                self.touch.append(False)

    def root(self) -> CoverInterval:
        return CoverInterval((Fraction(0), Fraction(0)), self.a_encl, "zero", "top")

    def _value_encl(self, label: str) -> tuple[Fraction, Fraction]:
        return (Fraction(0), Fraction(0)) if label == "zero" else self.a_encl

    def _contains(self, K: CoverInterval, label) -> bool:
        if label is None or label is False:
            return False
        if K.lo_label == label or K.hi_label == label:
            return True
        v = self._value_encl(label)
        if K.lo[1] < v[0] and v[1] < K.hi[0]:
            return True
        if v[1] < K.lo[0] or v[0] > K.hi[1]:
            return False
        raise CertificationError("cannot decide whether a touching point lies in a cover interval")

    def _meets_domain(self, j: int, K: CoverInterval) -> bool:
        br = self.branches[j]
        if br.full:
            return True
        dlo, dhi = br.domain
        return not (K.hi[1] < dlo.lo or K.lo[0] > dhi.hi)

    def _image_end(self, j: int, encl: tuple[Fraction, Fraction], label) -> tuple[tuple[Fraction, Fraction], Optional[str]]:
        br = self.branches[j]
        for end in (0, 1):
            if label is not None and self.domain_labels[j][end] == label:
                return _encl(br.range_value_at(end), self.width), self.range_labels[j][end]
        return br.enclose(*encl), None

    def _child(self, j: int, K: CoverInterval) -> CoverInterval:
        ends = [(K.lo, K.lo_label), (K.hi, K.hi_label)]
        if not self.branches[j].increasing:
            ends.reverse()
        (lo, lo_lab), (hi, hi_lab) = (self._image_end(j, e, lab) for e, lab in ends)
        return CoverInterval(lo, hi, lo_lab, hi_lab)

    def step(self, cover: IntervalCover) -> IntervalCover:
        pieces: list[tuple[int, CoverInterval, CoverInterval]] = []  # (branch, parent, child)
        for j, br in enumerate(self.branches):
            parents = list(cover.intervals) if br.increasing else list(reversed(cover.intervals))
            for K in parents:
                if self._meets_domain(j, K):
                    pieces.append((j, K, self._child(j, K)))
        merged: list[CoverInterval] = []
        prev = None
        for j, K, child in pieces:
            if merged and prev is not None and prev[0] == j - 1:
                label = self.touch[j - 1]
                if label and self._contains(prev[1], label) and self._contains(K, label):
                    last = merged.pop()
                    child = CoverInterval(last.lo, child.hi, last.lo_label, child.hi_label)
            merged.append(child)
            prev = (j, K)
        return IntervalCover(cover.depth + 1, tuple(merged))


class CoverTooLargeError(ValueError):
    pass


def cover_sequence(dec: DecimationData, depth: int, a: Optional[IsolatedRoot] = None,
                   max_intervals: int = 20000) -> list[IntervalCover]:
    """Covers R^{-n}([0, a]) for n = 0..depth.

    The cover can grow like deg(R)^n; a step whose input already holds
    more than ``max_intervals // len(branches)`` intervals is refused.
    """
    a = a if a is not None else julia_hull(dec)
    branches = partial_inverses(dec.R, a)
    eng = _CoverEngine(dec.R, a, branches)
    covers = [IntervalCover(0, (eng.root(),))]
    for n in range(depth):
        if len(covers[-1].intervals) * len(branches) > max_intervals:
            raise CoverTooLargeError(
                f"depth {n + 1} cover could exceed {max_intervals} intervals; lower the depth"
            )
        covers.append(eng.step(covers[-1]))
    return covers


def preimage_cover(dec: DecimationData, depth: int, a: Optional[IsolatedRoot] = None,
                   max_intervals: int = 20000) -> IntervalCover:
    return cover_sequence(dec, depth, a, max_intervals)[-1]


# ---------------------------------------------------------------------------
# classification
# ---------------------------------------------------------------------------


class JuliaKind(str, enum.Enum):
    INTERVAL = "INTERVAL"
    TOTALLY_DISCONNECTED = "TOTALLY_DISCONNECTED"


@dataclass(frozen=True)
class JuliaClassification:
    a: IsolatedRoot
    kind: JuliaKind
    preimage: tuple[tuple[IsolatedRoot, IsolatedRoot], ...]
    witness: Optional[tuple[IsolatedRoot, IsolatedRoot]] = None
    derivative_one_at_a: bool = False
    real_branch_count: int = 0

    def to_json(self, digits: int = 12) -> dict:
        return {
            "a": self.a.to_json(digits),
            "kind": self.kind.value,
            "preimage": [[lo.to_json(digits), hi.to_json(digits)] for lo, hi in self.preimage],
            "witness_gap": [e.to_json(digits) for e in self.witness] if self.witness else None,
            "derivative_one_at_a": self.derivative_one_at_a,
            "real_branch_count": self.real_branch_count,
        }


def classify(dec: DecimationData) -> JuliaClassification:
    a = julia_hull(dec)
    comps = preimage_intervals(dec.R, 0, a)
    if not comps:
        raise CertificationError("empty preimage of the hull")
    for lo, hi in comps:
        if cmp_rational(lo, 0) < 0 or algebraic_cmp(hi, a) > 0:
            raise CertificationError("preimage of the hull leaves the hull")
    flagged = derivative_is_one_at(dec.R, a)
    if flagged:
        warnings.warn("R'(a) = 1: indifferent fixed point at the hull end; classification is provisional")
    nbranches = len(partial_inverses(dec.R, a))
    if nbranches < dec.L:
        warnings.warn(
            f"only {nbranches} real inverse branches over [0, a] for a map of degree {dec.L}; "
            "the Julia set may have non-real parts"
        )
    if len(comps) == 1 and algebraic_equal(comps[0][0], ZERO) and algebraic_equal(comps[0][1], a):
        return JuliaClassification(a, JuliaKind.INTERVAL, tuple(comps), None, flagged, nbranches)
    witness = (comps[0][1], comps[1][0]) if len(comps) > 1 else None
    return JuliaClassification(a, JuliaKind.TOTALLY_DISCONNECTED, tuple(comps), witness, flagged, nbranches)


# ---------------------------------------------------------------------------
# preimages of the seed set
# ---------------------------------------------------------------------------


def dn_points(dec: DecimationData, level_zero_spectrum: Optional[Sequence] = None, n: int = 0) -> list[IsolatedRoot]:
    """Real preimages of order <= n of E together with sigma(Delta_0)."""
    if level_zero_spectrum is None:
        level_zero_spectrum = [v for v, _ in dec.level0_spectrum()]
    frontier = _sorted_unique(list(dec.exceptional_set) + [as_algebraic(v) for v in level_zero_spectrum])
    frontier = [IsolatedRoot(p.poly, p.lo, p.hi) for p in frontier]
    points = list(frontier)
    for _ in range(n):
        nxt = []
        for y in frontier:
            for x in preimages(dec.R, y):
                x = IsolatedRoot(x.poly, x.lo, x.hi)
                if not any(algebraic_equal(x, q) for q in points) and not any(algebraic_equal(x, q) for q in nxt):
                    nxt.append(x)
        points.extend(nxt)
        frontier = nxt
    return sorted(points, key=functools.cmp_to_key(algebraic_cmp))
