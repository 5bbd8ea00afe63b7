"""Gaps in the limit spectrum.

Three independent verdicts are offered: the Julia-set equivalence (gaps
exist iff the Julia set of R is totally disconnected), a finite-sample
ratio estimate, and explicit gap intervals (A_k, B_k) certified from two
separated inverse branches.
"""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .decimation import (
    BranchDescriptor,
    DecimationData,
    containment_holds,
    partial_inverses,
)
from .julia import JuliaClassification, JuliaKind, julia_hull
from .ratfield import (
    IsolatedRoot,
    RationalFunction,
    algebraic_cmp,
    algebraic_equal,
    as_algebraic,
    cmp_rational,
    isolate_real_roots,
)
from .spectrum import SpectrumRecord, lambda_limit


class GapMethod(str, enum.Enum):
    JULIA_EQUIVALENCE = "JULIA_EQUIVALENCE"
    RATIO_ESTIMATE = "RATIO_ESTIMATE"
    CRIT_INTERVALS = "CRIT_INTERVALS"


class StrayCheckError(RuntimeError):
    pass


RATIO_THRESHOLD = 1.1


@dataclass(frozen=True)
class GapInterval:
    k: int
    A: float
    B: float
    strays: tuple[float, ...] = ()
    free_length: Optional[float] = None  # longest eigenvalue-free subinterval

    def to_json(self, digits: int = 12) -> dict:
        return {
            "k": self.k,
            "A": float(f"{self.A:.{digits}g}"),
            "B": float(f"{self.B:.{digits}g}"),
            "strays": [float(f"{s:.{digits}g}") for s in self.strays],
            "free_length": None if self.free_length is None else float(f"{self.free_length:.{digits}g}"),
        }


@dataclass(frozen=True)
class GapReport:
    has_gaps: Optional[bool]
    method: GapMethod
    limsup_estimate: Optional[float] = None
    gap_intervals: tuple[GapInterval, ...] = ()
    stray_bound: Optional[int] = None
    checked_up_to: Optional[float] = None
    notes: tuple[str, ...] = ()

    @property
    def ratio(self) -> Optional[float]:
        if not self.gap_intervals:
            return None
        g = self.gap_intervals[0]
        return g.B / g.A

    def to_json(self, digits: int = 12) -> dict:
        return {
            "method": self.method.value,
            "has_gaps": self.has_gaps,
            "limsup_estimate": self.limsup_estimate,
            "gap_intervals": [g.to_json(digits) for g in self.gap_intervals],
            "stray_bound": self.stray_bound,
            "checked_up_to": self.checked_up_to,
            "notes": list(self.notes),
        }


# ---------------------------------------------------------------------------
# Julia equivalence and ratio estimate
# ---------------------------------------------------------------------------


def gaps_via_julia(classification: JuliaClassification, regular: bool = True) -> GapReport:
    if not regular:
        raise ValueError("the Julia criterion needs a regular structure")
    return GapReport(classification.kind == JuliaKind.TOTALLY_DISCONNECTED, GapMethod.JULIA_EQUIVALENCE)


def ratio_estimate(values: Sequence, min_count: int = 20, window: Optional[float] = None,
                   rel_tol: float = 1e-9) -> float:
    """Largest ratio of consecutive distinct eigenvalues near the top of the sample.

    Accepts floats or SpectrumRecords.  Repeated values give ratio 1 and
    would swamp a multiplicity-weighted tail, so values are deduplicated
    first.  The ratios are taken over [hi / window, hi]; with window = c^2
    this covers a full scaling period of a self-similar spectrum.  Without
    a window the upper log-half [sqrt(lo * hi), hi] is used.  A
    finite-sample proxy for the limsup.
    """
    vals = sorted(float(v.lambda_ if isinstance(v, SpectrumRecord) else v) for v in values)
    distinct: list[float] = []
    for v in vals:
        if v > 0 and (not distinct or v > distinct[-1] * (1 + rel_tol)):
            distinct.append(v)
    if len(distinct) < min_count:
        raise ValueError(f"need at least {min_count} distinct positive eigenvalues, got {len(distinct)}")
    arr = np.array(distinct)
    start = arr[-1] / window if window is not None else math.sqrt(arr[0] * arr[-1])
    tail = arr[arr >= start]
    if len(tail) < 2:
        raise ValueError("ratio window holds fewer than two eigenvalues")
    return float(np.max(tail[1:] / tail[:-1]))


def gaps_via_ratio(values: Sequence, threshold: float = RATIO_THRESHOLD,
                   window: Optional[float] = None) -> GapReport:
    est = ratio_estimate(values, window=window)
    return GapReport(est > threshold, GapMethod.RATIO_ESTIMATE, limsup_estimate=est, notes=("FINITE_SAMPLE",))


# ---------------------------------------------------------------------------
# the improved criterion
# ---------------------------------------------------------------------------


def _open_interval_roots(p, lo: IsolatedRoot, hi: IsolatedRoot) -> bool:
    """Does the polynomial p vanish strictly between lo and hi?"""
    if p.degree < 1:
        return False
    for r in isolate_real_roots(p):
        if algebraic_cmp(r, lo) > 0 and algebraic_cmp(r, hi) < 0:
            return True
    return False


def strictly_concave_on(R: RationalFunction, lo: IsolatedRoot, hi: IsolatedRoot) -> bool:
    """R'' < 0 on the open interval (lo, hi), certified exactly."""
    R2 = R.derivative().derivative()
    if R2.is_zero():
        return False
    if _open_interval_roots(R2.num, lo, hi) or _open_interval_roots(R2.den, lo, hi):
        return False
    a, b = lo, hi
    while not a.hi < b.lo:
        w = max(a.width, b.width) / 4
        a, b = a.refine(w), b.refine(w)
    return R2((a.hi + b.lo) / 2) < 0


def phi0_strictly_convex(R: RationalFunction, branch0: BranchDescriptor) -> bool:
    """phi_0'' = -R''(phi_0) (phi_0')^3 with phi_0' > 0, so convexity is concavity of R on the range."""
    return branch0.increasing and strictly_concave_on(R, branch0.range[0], branch0.range[1])


def branch_min(br: BranchDescriptor) -> IsolatedRoot:
    return br.range[0]


def branch_max(br: BranchDescriptor) -> IsolatedRoot:
    return br.range[1]


@dataclass(frozen=True)
class CritHypotheses:
    b: IsolatedRoot
    containment_ok: bool
    J: Optional[int]
    M: Optional[IsolatedRoot]
    m: Optional[IsolatedRoot]
    phi0_convex: bool
    phi0_contracting: bool
    z_star: IsolatedRoot
    n_shift: Optional[int]
    exceptional: tuple[IsolatedRoot, ...]
    branches: tuple[BranchDescriptor, ...] = field(repr=False, default=())

    @property
    def separated(self) -> bool:
        return self.M is not None and self.m is not None and algebraic_cmp(self.M, self.m) < 0

    @property
    def all_ok(self) -> bool:
        return (self.containment_ok and self.J is not None and self.phi0_convex
                and self.phi0_contracting and self.separated and self.n_shift is not None)

    @property
    def stray_bound(self) -> Optional[int]:
        return None if self.n_shift is None else self.n_shift * len(self.exceptional)

    def to_json(self, digits: int = 12) -> dict:
        def enc(x):
            return None if x is None else x.to_json(digits)

        return {
            "b": enc(self.b),
            "containment_ok": self.containment_ok,
            "J": self.J,
            "M": enc(self.M),
            "m": enc(self.m),
            "phi0_convex": self.phi0_convex,
            "phi0_contracting": self.phi0_contracting,
            "z_star": enc(self.z_star),
            "n_shift": self.n_shift,
            "exceptional": [enc(e) for e in self.exceptional],
            "all_ok": self.all_ok,
        }


def shift_count(branch0: BranchDescriptor, start: IsolatedRoot, target: IsolatedRoot, limit: int = 200) -> Optional[int]:
    """Least n with phi_0^n(start) < target, certified by rational upper bounds."""
    target_lo = target.refine(Fraction(1, 2**80)).lo if not target.is_exact else target.lo
    if algebraic_cmp(start, target) < 0:
        return 0
    upper = start.refine(Fraction(1, 2**80)).hi if not start.is_exact else start.lo
    for n in range(1, limit + 1):
        upper = branch0.bound(upper, False)
        if upper < target_lo:
            return n
    return None


def check_crit_hypotheses(dec: DecimationData, b_override=None, exceptional: Optional[Sequence] = None,
                          J: Optional[int] = None) -> CritHypotheses:
    """Evaluate the hypotheses of the improved gap criterion on [0, b]."""
    ex = tuple(as_algebraic(e) for e in (exceptional if exceptional is not None else dec.exceptional_set))
    ex = tuple(sorted(ex, key=functools.cmp_to_key(algebraic_cmp)))
    b = as_algebraic(b_override) if b_override is not None else ex[-1]
    if algebraic_cmp(b, ex[-1]) < 0:
        raise ValueError("b must dominate the exceptional set")
    containment = containment_holds(dec.R, b)
    branches = partial_inverses(dec.R, b)
    br0 = branches[0]
    convex = phi0_strictly_convex(dec.R, br0)
    contracting = algebraic_cmp(br0.range_value_at(1), b) < 0
    if J is None:
        sep = [j for j in range(len(branches) - 1)
               if algebraic_cmp(branch_max(branches[j]), branch_min(branches[j + 1])) < 0]
        J = sep[-1] if sep else None
    M = branch_max(branches[J]) if J is not None and J + 1 < len(branches) else None
    m = branch_min(branches[J + 1]) if J is not None and J + 1 < len(branches) else None
    if M is None:
        J = None
    n_shift = None
    if m is not None and contracting:
        n_shift = shift_count(br0, m, ex[0])
    return CritHypotheses(b, containment, J, M, m, convex, contracting, ex[0], n_shift, ex, tuple(branches))


def _limit(dec: DecimationData, hyp: CritHypotheses, x, i: int) -> float:
    return lambda_limit(dec, float(x), i, (), hyp.branches).lambda_


def crit_gap_intervals(dec: DecimationData, hyp: CritHypotheses, k_max: int = 3,
                       records: Optional[Sequence[SpectrumRecord]] = None,
                       lambda_max: Optional[float] = None, rel_tol: float = 1e-9) -> GapReport:
    """Gap intervals (A_k, B_k) for k = 0..k_max with the stray-eigenvalue check.

    ``records`` (sorted limit eigenvalues) are checked on every interval
    lying below ``lambda_max`` (the bound the records were computed to,
    default their largest value): at most ``stray_bound`` distinct eigenvalues
    may fall inside, each of the form c^i L(z) with z exceptional and
    k < i <= k + n_shift, where L(x) = lim c^n phi_0^n(x).
    """
    if not hyp.all_ok:
        raise ValueError("hypotheses of the gap criterion do not hold")
    c = float(dec.c_delta)
    A0 = _limit(dec, hyp, hyp.M, 1)
    B0 = _limit(dec, hyp, hyp.m, 1)
    bound = hyp.stray_bound
    values = sorted({r.lambda_ for r in records}) if records else []
    cutoff = (lambda_max if lambda_max is not None else max(values, default=None)) if records is not None else None
    ex_limits = [(float(z), lambda_limit(dec, float(z), 0, (), hyp.branches).lambda_) for z in hyp.exceptional]
    gaps = []
    notes = []
    for k in range(k_max + 1):
        A = _limit(dec, hyp, hyp.M, k + 1)
        B = _limit(dec, hyp, hyp.m, k + 1)
        if not A < B:
            raise StrayCheckError(f"A_{k} >= B_{k}")
        strays: tuple[float, ...] = ()
        free = None
        if cutoff is not None and B <= cutoff * (1 + 1e-12):
            inside = [v for v in values if A * (1 + rel_tol) < v < B * (1 - rel_tol)]
            if len(inside) > bound:
                raise StrayCheckError(f"{len(inside)} eigenvalues inside (A_{k}, B_{k}), bound {bound}")
            for v in inside:
                ok = any(
                    abs(v - c**i * Lz) <= 1e-8 * v
                    for _, Lz in ex_limits
                    for i in range(k + 1, k + hyp.n_shift + 1)
                )
                if not ok:
                    raise StrayCheckError(f"eigenvalue {v} inside (A_{k}, B_{k}) has an unexpected form")
            strays = tuple(inside)
            pts = [A] + list(inside) + [B]
            free = max(q - p for p, q in zip(pts, pts[1:]))
        gaps.append(GapInterval(k, A, B, strays, free))
    if cutoff is None:
        notes.append("no spectrum supplied; stray check skipped")
    return GapReport(True, GapMethod.CRIT_INTERVALS, gap_intervals=tuple(gaps), stray_bound=bound,
                     checked_up_to=cutoff, notes=tuple(notes))


# ---------------------------------------------------------------------------
# corollaries
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CorollaryVerdict:
    name: str
    hypotheses_hold: bool
    gap_verdict: Optional[bool]
    theorem: Optional[CritHypotheses] = field(default=None, repr=False)
    detail: str = ""

    def to_json(self, digits: int = 12) -> dict:
        return {
            "corollary": self.name,
            "hypotheses_hold": self.hypotheses_hold,
            "gap_verdict": self.gap_verdict,
            "detail": self.detail,
            "theorem_hypotheses": self.theorem.to_json(digits) if self.theorem else None,
        }


def _decreasing_full(branches: Sequence[BranchDescriptor], j: int) -> bool:
    return j < len(branches) and branches[j].full and not branches[j].increasing


def _theorem_verdict(dec: DecimationData, b, exceptional=None, J=None) -> tuple[Optional[bool], CritHypotheses]:
    hyp = check_crit_hypotheses(dec, b, exceptional, J)
    if not hyp.all_ok:
        return False, hyp
    rep = crit_gap_intervals(dec, hyp, k_max=1)
    return rep.has_gaps, hyp


def corollary_monotone_branch(dec: DecimationData) -> CorollaryVerdict:
    """phi_1 decreasing, phi_0 strictly convex and phi_0(b) < phi_1(b) at b = max E."""
    name = "phi1-decreasing"
    b = dec.exceptional_set[-1]
    branches = partial_inverses(dec.R, b)
    ok = (
        containment_holds(dec.R, b)
        and len(branches) >= 2
        and _decreasing_full(branches, 1)
        and branches[0].full
        and phi0_strictly_convex(dec.R, branches[0])
        and algebraic_cmp(branches[0].range_value_at(1), branches[1].range_value_at(1)) < 0
    )
    if not ok:
        return CorollaryVerdict(name, False, None)
    verdict, hyp = _theorem_verdict(dec, b, J=0)
    return CorollaryVerdict(name, True, verdict, hyp)


def corollary_consecutive(dec: DecimationData, extra_c: Sequence = ()) -> CorollaryVerdict:
    """Consecutive exceptional values alpha < beta with phi_0(c) <= alpha and phi_1 >= beta on [0, c]."""
    name = "consecutive-exceptional"
    ex = dec.exceptional_set
    b = ex[-1]
    cands = [b]
    try:
        a = julia_hull(dec)
        if algebraic_cmp(a, b) > 0:
            cands.append(a)
    except ValueError:
        pass
    cands += [as_algebraic(x) for x in extra_c if algebraic_cmp(as_algebraic(x), b) >= 0]
    for c in cands:
        if not containment_holds(dec.R, c):
            continue
        branches = partial_inverses(dec.R, c)
        if len(branches) < 2 or not phi0_strictly_convex(dec.R, branches[0]):
            continue
        phi0_c = branches[0].range_value_at(1)
        min_phi1 = branch_min(branches[1])
        for alpha, beta in zip(ex, ex[1:]):
            if algebraic_cmp(phi0_c, alpha) <= 0 and algebraic_cmp(min_phi1, beta) >= 0:
                verdict, hyp = _theorem_verdict(dec, c, J=0)
                return CorollaryVerdict(name, True, verdict, hyp,
                                        f"alpha={float(alpha):.12g}, beta={float(beta):.12g}, c={float(c):.12g}")
    return CorollaryVerdict(name, False, None)


def augmented_exceptional(dec: DecimationData) -> list[IsolatedRoot]:
    """E without its maximum b, together with phi_j(b) for every branch."""
    b = dec.exceptional_set[-1]
    pts = list(dec.exceptional_set[:-1])
    for br in partial_inverses(dec.R, b):
        pts.append(br.range_value_at(1))
    out: list[IsolatedRoot] = []
    for p in pts:
        if not any(algebraic_equal(p, q) for q in out):
            out.append(p)
    return sorted(out, key=functools.cmp_to_key(algebraic_cmp))


def corollary_two_largest(dec: DecimationData) -> CorollaryVerdict:
    """a < b the two largest exceptional values with R^{-1}[0, b] in [0, a]."""
    name = "two-largest-exceptional"
    ex = dec.exceptional_set
    if len(ex) < 2:
        return CorollaryVerdict(name, False, None, detail="fewer than two exceptional values")
    a, b = ex[-2], ex[-1]
    branches = partial_inverses(dec.R, b)
    inside = all(
        cmp_rational(br.range[0], 0) >= 0 and algebraic_cmp(br.range[1], a) <= 0 for br in branches
    )
    ok = (
        inside
        and containment_holds(dec.R, b)
        and _decreasing_full(branches, 1)
        and phi0_strictly_convex(dec.R, branches[0])
    )
    if not ok:
        return CorollaryVerdict(name, False, None)
    aug = augmented_exceptional(dec)
    verdict, hyp = _theorem_verdict(dec, aug[-1], exceptional=aug, J=0)
    return CorollaryVerdict(name, True, verdict, hyp, f"augmented set of size {len(aug)}")


def corollary_checks(dec: DecimationData) -> list[CorollaryVerdict]:
    return [corollary_monotone_branch(dec), corollary_consecutive(dec), corollary_two_largest(dec)]
