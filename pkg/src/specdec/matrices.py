"""Probabilistic graph Laplacians M_n and their block decomposition.

Rows and columns are ordered with V_{n-1} first (in the order given by the
graph's ``v_prev_ids``), then V_n minus V_{n-1} in increasing vertex id.  The
operator is the non-negative one, ``(M f)(x) = f(x) - mean of f over the
neighbours of x``.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .structure import LevelGraph


@dataclass(frozen=True)
class LaplacianMatrix:
    level: int
    entries: tuple[tuple[Fraction, ...], ...]
    ordering: tuple[int, ...]  # graph vertex id of each row
    split: int  # |V_{n-1}|, 0 at level 0

    @property
    def size(self) -> int:
        return len(self.entries)

    def to_numpy(self) -> np.ndarray:
        return np.array([[float(v) for v in row] for row in self.entries])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["row_vertex"] + [str(v) for v in self.ordering])
        for v, row in zip(self.ordering, self.entries):
            w.writerow([str(v)] + [str(x) for x in row])
        return buf.getvalue()


@dataclass(frozen=True)
class BlockDecomposition:
    A: tuple[tuple[Fraction, ...], ...]
    B: tuple[tuple[Fraction, ...], ...]
    C: tuple[tuple[Fraction, ...], ...]
    D: tuple[tuple[Fraction, ...], ...]


def vertex_ordering(graph: LevelGraph) -> tuple[int, ...]:
    if graph.level == 0:
        return tuple(range(graph.num_vertices))
    prev = list(graph.v_prev_ids)
    seen = set(prev)
    return tuple(prev + [v for v in range(graph.num_vertices) if v not in seen])


def laplacian_matrix(graph: LevelGraph) -> LaplacianMatrix:
    order = vertex_ordering(graph)
    pos = {v: i for i, v in enumerate(order)}
    n = graph.num_vertices
    rows = [[Fraction(0)] * n for _ in range(n)]
    adj = graph.adjacency()
    for v in range(n):
        i = pos[v]
        rows[i][i] = Fraction(1)
        w = Fraction(-1, graph.degrees[v])
        for u in adj[v]:
            rows[i][pos[u]] = w
    split = len(graph.v_prev_ids) if graph.level > 0 else 0
    return LaplacianMatrix(graph.level, tuple(tuple(r) for r in rows), order, split)


def block_decompose(M: LaplacianMatrix) -> BlockDecomposition:
    if M.level < 1:
        raise ValueError("block decomposition needs level >= 1")
    k = M.split
    e = M.entries
    return BlockDecomposition(
        A=tuple(tuple(r[:k]) for r in e[:k]),
        B=tuple(tuple(r[k:]) for r in e[:k]),
        C=tuple(tuple(r[:k]) for r in e[k:]),
        D=tuple(tuple(r[k:]) for r in e[k:]),
    )


def float_laplacian(graph: LevelGraph) -> tuple[np.ndarray, np.ndarray, tuple[int, ...]]:
    """Floating M_n in canonical ordering together with the row degrees.

    Intended for levels too large for exact storage.
    """
    order = vertex_ordering(graph)
    pos = np.empty(graph.num_vertices, dtype=np.int64)
    pos[list(order)] = np.arange(graph.num_vertices)
    deg = np.array([graph.degrees[v] for v in order], dtype=float)
    M = np.eye(graph.num_vertices)
    if graph.edges:
        e = np.array(sorted(graph.edges), dtype=np.int64)
        a, b = pos[e[:, 0]], pos[e[:, 1]]
        M[a, b] = -1.0 / deg[a]
        M[b, a] = -1.0 / deg[b]
    return M, deg, order


def symmetrized(M: np.ndarray, deg: np.ndarray) -> np.ndarray:
    """D^{1/2} M D^{-1/2}, symmetric for probabilistic Laplacians."""
    s = np.sqrt(deg)
    S = (M * s[:, None]) / s[None, :]
    return (S + S.T) / 2
