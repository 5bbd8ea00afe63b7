"""Eigenvalues of the limit Laplacian as renormalized limits of graph eigenvalues.

A limit eigenvalue is ``c^i lim_m c^{|w| + m} phi_0^m(phi_w(seed))`` with seed
in sigma(Delta_0) or the exceptional set, born at level i, and w a branch
word.  Near 0 the branch phi_0 behaves like y / c, so the scaled iterates
converge geometrically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .decimation import (
    BranchDescriptor,
    DecimationData,
    DecimationError,
    dimension_report,
    level_spectrum,
    provenance_branches,
)
from .structure import FractalStructure, build_graph


class ConvergenceError(RuntimeError):
    pass


class NonRegularError(DecimationError):
    pass


@dataclass(frozen=True)
class SpectrumRecord:
    lambda_: float
    seed: float
    birth_level: int
    word: tuple[int, ...]
    multiplicity: int = 1
    n0: Optional[int] = None
    convergence_trace: tuple[float, ...] = field(default=(), repr=False)

    @property
    def word_string(self) -> str:
        return f"i={self.birth_level};seed={self.seed:.12g};w={''.join(map(str, self.word)) or '-'}"

    def to_json(self, digits: int = 12) -> dict:
        return {
            "lambda": float(f"{self.lambda_:.{digits}g}"),
            "multiplicity": self.multiplicity,
            "n0": self.n0,
            "seed": self.seed,
            "birth_level": self.birth_level,
            "word": list(self.word),
        }


@dataclass(frozen=True)
class SpectrumQuery:
    lambda_max: float
    n0: Optional[int] = None
    dirichlet: bool = False
    rel_tol: float = 1e-12
    max_iter: int = 200
    max_vertices: int = 4000


def apply_word(branches: Sequence[BranchDescriptor], word: Sequence[int], x: float) -> float:
    """phi_{w_1} o ... o phi_{w_k} (x): the last letter acts first."""
    for j in reversed(word):
        x = branches[j](x)
    return x


def lambda_limit(dec: DecimationData, seed: float, i: int = 0, word: Sequence[int] = (),
                 branches: Optional[Sequence[BranchDescriptor]] = None,
                 rel_tol: float = 1e-12, max_iter: int = 200) -> SpectrumRecord:
    """Renormalized limit of the phi_0 orbit of phi_w(seed)."""
    branches = list(branches if branches is not None else dec.branches)
    phi0 = branches[0]
    c = float(dec.c_delta)
    x = apply_word(branches, word, float(seed))
    power = i + len(word)
    trace = [c**power * x]
    if x == 0:
        return SpectrumRecord(0.0, float(seed), i, tuple(word), convergence_trace=tuple(trace))
    for _ in range(max_iter):
        x = phi0(x)
        power += 1
        s = c**power * x
        trace.append(s)
        if abs(trace[-1] - trace[-2]) < rel_tol * abs(s):
            return SpectrumRecord(s, float(seed), i, tuple(word), convergence_trace=tuple(trace))
    raise ConvergenceError(f"no convergence within {max_iter} iterations for seed {seed}")


def anchor_bound(dec: DecimationData) -> float:
    """Level-n0 eigenvalues below this value continue along phi_0 only."""
    bound = dec.min_exceptional
    others = [float(br.range[0]) for br in dec.branches[1:]]
    return min([bound] + others)


def choose_n0(dec: DecimationData, lambda_max: float) -> int:
    """Least n0 with c^{-n0} Lambda below min E and below every other branch.

    The second condition keeps the level-n0 eigenvalues in question inside
    the range of phi_0 alone.
    """
    c = float(dec.c_delta)
    bound = anchor_bound(dec)
    n0 = 0
    while lambda_max / c**n0 >= bound:
        n0 += 1
    return n0


def spectrum_up_to(structure: FractalStructure, dec: DecimationData, query: SpectrumQuery) -> list[SpectrumRecord]:
    """All limit eigenvalues below ``query.lambda_max`` with multiplicities."""
    if not dimension_report(dec, structure).regular:
        raise NonRegularError("structure is not regular (r >= 1); limit spectrum is not defined here")
    n0 = query.n0 if query.n0 is not None else choose_n0(dec, query.lambda_max)
    if build_graph(structure, n0).num_vertices > query.max_vertices:
        raise ValueError(f"anchoring level {n0} exceeds the dense eigensolver budget")
    c = float(dec.c_delta)
    threshold = query.lambda_max / c**n0
    ls = level_spectrum(structure, dec, n0, dirichlet=query.dirichlet)
    branches = provenance_branches(dec)
    out = []
    for e in ls.entries:
        if e.value > threshold:
            continue
        if e.word is not None and not query.dirichlet:
            # recompute from the exact seed for full relative accuracy
            rec = lambda_limit(dec, e.seed, e.birth_level, e.word, branches, query.rel_tol, query.max_iter)
        else:
            rec = _limit_from_value(dec, e.value, n0, query)
        if rec.lambda_ >= query.lambda_max:
            continue
        out.append(SpectrumRecord(rec.lambda_, rec.seed, rec.birth_level, rec.word, e.multiplicity, n0,
                                  rec.convergence_trace))
    out.sort(key=lambda r: (r.lambda_, r.word))
    return out


def spectrum_sample(structure: FractalStructure, dec: DecimationData, max_vertices: int = 2000,
                    max_level: int = 8) -> tuple[list[SpectrumRecord], float]:
    """Every limit eigenvalue reachable from the deepest level within budget.

    Returns the records and the cutoff Lambda they are complete up to.
    """
    n = 0
    while n < max_level and build_graph(structure, n + 1).num_vertices <= max_vertices:
        n += 1
    lam = float(dec.c_delta) ** n * anchor_bound(dec) * (1 - 1e-9)
    query = SpectrumQuery(lam, n0=n, max_vertices=max_vertices)
    return spectrum_up_to(structure, dec, query), lam


def _limit_from_value(dec: DecimationData, value: float, n0: int, query: SpectrumQuery) -> SpectrumRecord:
    rec = lambda_limit(dec, value, n0, (), None, query.rel_tol, query.max_iter)
    return SpectrumRecord(rec.lambda_, value, n0, (), convergence_trace=rec.convergence_trace)


def expand(records: Sequence[SpectrumRecord]) -> np.ndarray:
    """Eigenvalues repeated by multiplicity, ascending."""
    return np.sort(np.repeat([r.lambda_ for r in records], [r.multiplicity for r in records]))


@dataclass(frozen=True)
class CountingPoint:
    x: float
    count: int
    weyl_ratio: float


def counting_function(records: Sequence[SpectrumRecord], x_grid: Sequence[float], d_S: float) -> list[CountingPoint]:
    """N(x) = #{lambda_k <= x} and N(x) / x^{d_S / 2} on a grid."""
    vals = expand(records) if records else np.array([])
    out = []
    for x in x_grid:
        n = int(np.searchsorted(vals, x, side="right"))
        ratio = n / x ** (d_S / 2) if x > 0 else math.nan
        out.append(CountingPoint(float(x), n, ratio))
    return out
