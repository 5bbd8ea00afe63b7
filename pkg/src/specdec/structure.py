"""Declarative fully symmetric finitely ramified structures and their graphs G_n.

A structure is given by level-1 combinatorics only: ``cell_maps[j][u]`` is the
V_1 vertex onto which cell ``j`` places its copy of boundary vertex ``u``.
Each cell carries a complete graph on the boundary, so G_1 is the union of
the images of K_{|V_0|}, and G_n is obtained by substituting G_{n-1} into
every cell and gluing along the identified boundary copies.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Optional

import networkx as nx
from networkx.algorithms.isomorphism import GraphMatcher


class MalformedStructureError(ValueError):
    pass


Edge = tuple[int, int]


def _edge(a: int, b: int) -> Edge:
    return (a, b) if a < b else (b, a)


def _connected(num_vertices: int, edges: Iterable[Edge]) -> bool:
    adj: dict[int, list[int]] = {v: [] for v in range(num_vertices)}
    for a, b in edges:
        adj[a].append(b)
        adj[b].append(a)
    seen = {0}
    stack = [0]
    while stack:
        v = stack.pop()
        for w in adj[v]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return len(seen) == num_vertices


@dataclass(frozen=True)
class FractalStructure:
    name: str
    num_cells: int
    boundary_size: int
    v1_size: int
    cell_maps: tuple[tuple[int, ...], ...]
    v0_embedding: tuple[int, ...]
    expected: Optional[dict] = field(default=None, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "cell_maps", tuple(tuple(int(v) for v in c) for c in self.cell_maps))
        object.__setattr__(self, "v0_embedding", tuple(int(v) for v in self.v0_embedding))
        self._validate()

    def _validate(self):
        N, b, n1 = self.num_cells, self.boundary_size, self.v1_size
        if N < 2 or b < 2:
            raise MalformedStructureError("need at least two cells and two boundary vertices")
        if len(self.cell_maps) != N:
            raise MalformedStructureError(f"expected {N} cell maps, got {len(self.cell_maps)}")
        if len(self.v0_embedding) != b:
            raise MalformedStructureError("v0_embedding must list one V_1 vertex per boundary vertex")
        covered = set()
        for j, cm in enumerate(self.cell_maps):
            if len(cm) != b:
                raise MalformedStructureError(f"cell {j} maps {len(cm)} boundary vertices, expected {b}")
            if len(set(cm)) != b:
                raise MalformedStructureError(f"cell map {j} is not injective")
            if any(not 0 <= v < n1 for v in cm):
                raise MalformedStructureError(f"cell map {j} leaves the vertex range 0..{n1 - 1}")
            covered.update(cm)
        if covered != set(range(n1)):
            raise MalformedStructureError("cell images do not cover V_1")
        if len(set(self.v0_embedding)) != b:
            raise MalformedStructureError("v0_embedding is not injective")
        for u, v in enumerate(self.v0_embedding):
            if not self.cells_containing(v):
                raise MalformedStructureError(f"boundary vertex {u} lies in no cell")
        if not _connected(n1, self.level1_edges()):
            raise MalformedStructureError("level-1 graph is disconnected")

    def cells_containing(self, vertex: int) -> list[tuple[int, int]]:
        """Pairs (cell, boundary index) whose image is ``vertex``."""
        return [(j, cm.index(vertex)) for j, cm in enumerate(self.cell_maps) if vertex in cm]

    def level1_edges(self) -> frozenset[Edge]:
        return frozenset(
            _edge(cm[u], cm[w])
            for cm in self.cell_maps
            for u, w in itertools.combinations(range(self.boundary_size), 2)
        )

    def to_dict(self) -> dict:
        d = {
            "name": self.name,
            "num_cells": self.num_cells,
            "boundary_size": self.boundary_size,
            "v1_size": self.v1_size,
            "v0_embedding": list(self.v0_embedding),
            "cell_maps": [list(c) for c in self.cell_maps],
        }
        if self.expected:
            d["expected"] = dict(self.expected)
        return d


@dataclass(frozen=True)
class LevelGraph:
    """G_n with V_{n-1} embedded through ``v_prev_ids``.

    ``cell_copies[j][x]`` is the G_n vertex of cell j's copy of G_{n-1}
    vertex x; ``boundary_ids[u]`` locates V_0 inside V_n.
    """

    level: int
    num_vertices: int
    edges: frozenset[Edge]
    v_prev_ids: tuple[int, ...]
    degrees: tuple[int, ...]
    boundary_ids: tuple[int, ...]
    cell_copies: tuple[tuple[int, ...], ...] = ()

    def adjacency(self) -> list[list[int]]:
        adj = [[] for _ in range(self.num_vertices)]
        for a, b in sorted(self.edges):
            adj[a].append(b)
            adj[b].append(a)
        return adj


def _degrees(n: int, edges) -> tuple[int, ...]:
    deg = [0] * n
    for a, b in edges:
        deg[a] += 1
        deg[b] += 1
    return tuple(deg)


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a: int, b: int):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            # smaller index stays canonical
            if rb < ra:
                ra, rb = rb, ra
            self.parent[rb] = ra


def _level0(s: FractalStructure) -> LevelGraph:
    b = s.boundary_size
    edges = frozenset(_edge(u, w) for u, w in itertools.combinations(range(b), 2))
    return LevelGraph(0, b, edges, (), _degrees(b, edges), tuple(range(b)))


def _level1(s: FractalStructure) -> LevelGraph:
    edges = s.level1_edges()
    return LevelGraph(
        1, s.v1_size, edges, s.v0_embedding, _degrees(s.v1_size, edges), s.v0_embedding, s.cell_maps
    )


@lru_cache(maxsize=64)
def build_graph(structure: FractalStructure, n: int) -> LevelGraph:
    """Materialize G_n by recursive substitution.

    For n >= 2 the vertices of V_{n-1} keep their ids and the new vertices are
    numbered after them, ordered by their smallest address (cell, parent id).
    """
    if n < 0:
        raise ValueError("level must be non-negative")
    if n == 0:
        return _level0(structure)
    if n == 1:
        return _level1(structure)
    prev = build_graph(structure, n - 1)
    N, m = structure.num_cells, prev.num_vertices
    uf = _UnionFind(N * m)
    cm = structure.cell_maps
    for (j, cj), (k, ck) in itertools.combinations(enumerate(cm), 2):
        for p, vp in enumerate(cj):
            if vp in ck:
                q = ck.index(vp)
                uf.union(j * m + prev.boundary_ids[p], k * m + prev.boundary_ids[q])
    roots = [uf.find(i) for i in range(N * m)]
    for j in range(N):
        if len({roots[j * m + x] for x in range(m)}) != m:
            raise MalformedStructureError(f"two vertices of cell {j} are identified at level {n}")

    # V_{n-1} vertex y = copy (j', x') of level n-2 vertex x'; it sits at copy (j', e(x')) in V_n
    embed_prev = prev.v_prev_ids
    rep: dict[int, tuple[int, int]] = {}
    for jp, copy in enumerate(prev.cell_copies):
        for xp, y in enumerate(copy):
            rep.setdefault(y, (jp, xp))
    if len(rep) != m:
        raise MalformedStructureError("level graph copies do not cover the previous level")
    root_of_prev = []
    for y in range(m):
        jp, xp = rep[y]
        root_of_prev.append(roots[jp * m + embed_prev[xp]])
    if len(set(root_of_prev)) != m:
        raise MalformedStructureError(f"V_{n - 1} does not embed injectively into V_{n}")

    new_id: dict[int, int] = {r: y for y, r in enumerate(root_of_prev)}
    # canonical representatives are the smallest address j*m + x, so root order is address order
    for r in sorted(set(roots)):
        if r not in new_id:
            new_id[r] = len(new_id)
    nv = len(new_id)
    copies = tuple(tuple(new_id[roots[j * m + x]] for x in range(m)) for j in range(N))
    edges = set()
    for j in range(N):
        c = copies[j]
        for a, b in prev.edges:
            e = _edge(c[a], c[b])
            if e[0] == e[1] or e in edges:
                raise MalformedStructureError(f"degenerate or duplicate edge at level {n}")
            edges.add(e)
    boundary = []
    for u, v in enumerate(structure.v0_embedding):
        j, up = structure.cells_containing(v)[0]
        boundary.append(copies[j][prev.boundary_ids[up]])
    g = LevelGraph(
        n,
        nv,
        frozenset(edges),
        tuple(range(m)),
        _degrees(nv, edges),
        tuple(boundary),
        copies,
    )
    _check_level(g)
    return g


def _check_level(g: LevelGraph):
    if not _connected(g.num_vertices, g.edges):
        raise MalformedStructureError(f"G_{g.level} is disconnected")
    prev = set(g.v_prev_ids)
    for a, b in g.edges:
        if a in prev and b in prev:
            raise MalformedStructureError(f"two V_{g.level - 1} vertices adjacent in G_{g.level}")


def substitution_consistent(structure: FractalStructure, n: int) -> bool:
    """Every cell of G_n carries an exact copy of G_{n-1} and the copies partition the edges."""
    g = build_graph(structure, n)
    prev = build_graph(structure, n - 1)
    seen: set[Edge] = set()
    for copy in g.cell_copies:
        image = {_edge(copy[a], copy[b]) for a, b in prev.edges}
        if len(image) != len(prev.edges) or image & seen:
            return False
        seen |= image
    return seen == set(g.edges)


# ---------------------------------------------------------------------------
# symmetry
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SymmetryReport:
    # boundary permutations realized by cell-compatible automorphisms (pi, rho)
    compatible_actions: frozenset[tuple[int, ...]]
    doubly_transitive: bool
    # double transitivity of the marked level-1 graph's automorphisms on V_0
    graph_doubly_transitive: bool

    @property
    def admits_decimation(self) -> bool:
        return self.doubly_transitive or self.graph_doubly_transitive

    def to_json(self) -> dict:
        return {
            "compatible_group_order_on_v0": len(self.compatible_actions),
            "doubly_transitive": self.doubly_transitive,
            "graph_doubly_transitive": self.graph_doubly_transitive,
        }


def _is_doubly_transitive(actions: Iterable[tuple[int, ...]], k: int) -> bool:
    pairs = {(s[0], s[1]) for s in actions}
    return len(pairs) == k * (k - 1)


def compatible_automorphisms(structure: FractalStructure, edges=None) -> list[tuple[tuple[int, ...], tuple[int, ...], tuple[int, ...]]]:
    """Exhaustive search for (sigma, rho, pi) with pi(cell_j(u)) = cell_{rho(j)}(sigma(u)).

    ``pi`` must also send V_0 to V_0 through ``sigma`` and preserve ``edges``.
    """
    edges = structure.level1_edges() if edges is None else frozenset(_edge(*e) for e in edges)
    cm, v0 = structure.cell_maps, structure.v0_embedding
    b, N, n1 = structure.boundary_size, structure.num_cells, structure.v1_size
    found = []
    for sigma in itertools.permutations(range(b)):
        for rho in itertools.permutations(range(N)):
            pi = [-1] * n1
            ok = True
            for j in range(N):
                for u in range(b):
                    src, dst = cm[j][u], cm[rho[j]][sigma[u]]
                    if pi[src] == -1:
                        pi[src] = dst
                    elif pi[src] != dst:
                        ok = False
                        break
                if not ok:
                    break
            if not ok or len(set(pi)) != n1:
                continue
            if any(pi[v0[u]] != v0[sigma[u]] for u in range(b)):
                continue
            if {_edge(pi[a], pi[c]) for a, c in edges} != edges:
                continue
            found.append((sigma, rho, tuple(pi)))
    return found


def _graph_doubly_transitive(structure: FractalStructure, edges) -> bool:
    v0 = structure.v0_embedding
    G = nx.Graph()
    G.add_nodes_from(range(structure.v1_size))
    G.add_edges_from(edges)

    def labelled(first: int, second: int) -> nx.Graph:
        H = G.copy()
        for v in H.nodes:
            H.nodes[v]["tag"] = "V" if v in v0 else "I"
        H.nodes[v0[first]]["tag"] = "A"
        H.nodes[v0[second]]["tag"] = "B"
        return H

    ref = labelled(0, 1)
    match = lambda a, c: a["tag"] == c["tag"]
    for a, c in itertools.permutations(range(structure.boundary_size), 2):
        if not GraphMatcher(ref, labelled(a, c), node_match=match).is_isomorphic():
            return False
    return True


def validate_full_symmetry(structure: FractalStructure, edges=None) -> SymmetryReport:
    """Search the level-1 symmetries and report how they act on V_0.

    ``edges`` overrides the level-1 edge set (used to probe damaged structures).
    """
    edges = structure.level1_edges() if edges is None else frozenset(_edge(*e) for e in edges)
    autos = compatible_automorphisms(structure, edges)
    actions = frozenset(a[0] for a in autos)
    return SymmetryReport(
        compatible_actions=actions,
        doubly_transitive=_is_doubly_transitive(actions, structure.boundary_size),
        graph_doubly_transitive=_graph_doubly_transitive(structure, edges),
    )


def check_pcf(structure: FractalStructure) -> bool:
    return all(len(structure.cells_containing(v)) == 1 for v in structure.v0_embedding)
