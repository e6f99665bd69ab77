"""Quotient gain graphs of periodic graphs.

A gain graph stores finitely many edges labeled by integer translation
vectors; unrolling those labels over the integer lattice recovers the infinite
periodic graph.  Edges keep the orientation they were constructed with (an
orientation flip only multiplies incidence rows by -1 and leaves every
Laplacian unchanged), while :func:`canonicalize_edge` provides the canonical
representative used to detect duplicates under (u,v,g) ~ (v,u,-g).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Hashable, Iterable, NamedTuple, Optional, Sequence

import numpy as np

from .errors import (
    DuplicateEdge,
    GainDimensionMismatch,
    InternalInconsistency,
    ZeroLoop,
)
from .linalg import numeric_rank, smith_rank
from .tolerances import ToleranceVault

Vertex = Hashable

MARKINGS = ("bar", "cable", "strut")


class GainEdge(NamedTuple):
    tail: Vertex
    head: Vertex
    gain: tuple[int, ...]
    marking: str = "bar"

    @property
    def is_loop(self) -> bool:
        return self.tail == self.head

    def reversed(self) -> "GainEdge":
        return GainEdge(self.head, self.tail, tuple(-g for g in self.gain), self.marking)


def _gain_tuple(gain) -> tuple[int, ...]:
    out = []
    for g in np.asarray(gain).ravel().tolist():
        if isinstance(g, bool) or not isinstance(g, int):
            raise GainDimensionMismatch(f"gain entries must be integers, got {g!r}")
        out.append(g)
    return tuple(out)


def canonicalize_edge(tail, head, gain, order: Sequence[Vertex]) -> GainEdge:
    """Canonical representative of the edge class {(u,v,g), (v,u,-g)}.

    Non-loops are oriented tail-before-head in ``order``; loops flip so the
    first nonzero gain entry is positive.  Idempotent.
    """
    gain = _gain_tuple(gain)
    if tail == head:
        if not any(gain):
            raise ZeroLoop(f"loop at {tail!r} must have a nonzero gain")
        first = next(g for g in gain if g != 0)
        if first < 0:
            gain = tuple(-g for g in gain)
        return GainEdge(tail, head, gain)
    index = {v: i for i, v in enumerate(order)}
    if index[tail] > index[head]:
        return GainEdge(head, tail, tuple(-g for g in gain))
    return GainEdge(tail, head, gain)


class GainGraph:
    """Finite directed multigraph with integer-vector gains and edge markings.

    Immutable after construction; all derived matrices use the construction
    order of vertices and edges, so matrix layouts are reproducible
    bit-for-bit.
    """

    def __init__(self, dimension: int, vertices: Sequence[Vertex], edges: Iterable):
        if dimension < 1:
            raise ValueError("dimension must be a positive integer")
        self.dimension = int(dimension)
        self.vertices: tuple[Vertex, ...] = tuple(vertices)
        if not self.vertices:
            raise ValueError("a gain graph needs at least one vertex")
        if len(set(self.vertices)) != len(self.vertices):
            raise ValueError("vertex names must be distinct")
        self._index: dict[Vertex, int] = {v: i for i, v in enumerate(self.vertices)}

        normalized: list[GainEdge] = []
        seen: set[tuple] = set()
        for raw in edges:
            edge = self._coerce_edge(raw)
            key = self._class_key(edge)
            if key in seen:
                raise DuplicateEdge(f"edge {edge} duplicates an earlier edge under ~")
            seen.add(key)
            normalized.append(edge)
        self.edges: tuple[GainEdge, ...] = tuple(normalized)

    def _coerce_edge(self, raw) -> GainEdge:
        if isinstance(raw, GainEdge):
            tail, head, gain, marking = raw
        else:
            parts = tuple(raw)
            if len(parts) == 3:
                tail, head, gain = parts
                marking = "bar"
            elif len(parts) == 4:
                tail, head, gain, marking = parts
            else:
                raise ValueError(f"edge must be (tail, head, gain[, marking]), got {raw!r}")
        if tail not in self._index or head not in self._index:
            raise ValueError(f"edge {raw!r} references an unknown vertex")
        if marking not in MARKINGS:
            raise ValueError(f"marking must be one of {MARKINGS}, got {marking!r}")
        gain = _gain_tuple(gain)
        if len(gain) != self.dimension:
            raise GainDimensionMismatch(
                f"gain {gain} has length {len(gain)}, expected {self.dimension}"
            )
        if tail == head and not any(gain):
            raise ZeroLoop(f"loop at {tail!r} must have a nonzero gain")
        return GainEdge(tail, head, gain, marking)

    def _class_key(self, edge: GainEdge) -> tuple:
        canon = canonicalize_edge(edge.tail, edge.head, edge.gain, self.vertices)
        return (canon.tail, canon.head, canon.gain)

    # -- basic accessors -------------------------------------------------

    @property
    def num_vertices(self) -> int:
        return len(self.vertices)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def vertex_index(self, v: Vertex) -> int:
        return self._index[v]

    def markings(self) -> tuple[str, ...]:
        return tuple(e.marking for e in self.edges)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, GainGraph)
            and self.dimension == other.dimension
            and self.vertices == other.vertices
            and self.edges == other.edges
        )

    def __repr__(self) -> str:
        return (
            f"GainGraph(d={self.dimension}, |V|={self.num_vertices}, "
            f"|E|={self.num_edges})"
        )

    def with_markings(self, markings: Sequence[str]) -> "GainGraph":
        if len(markings) != self.num_edges:
            raise ValueError("need one marking per edge")
        edges = [GainEdge(e.tail, e.head, e.gain, m) for e, m in zip(self.edges, markings)]
        return GainGraph(self.dimension, self.vertices, edges)

    def without_loops(self) -> tuple["GainGraph", list[int]]:
        """Loop-free copy plus the indices of the surviving edges."""
        keep = [i for i, e in enumerate(self.edges) if not e.is_loop]
        return GainGraph(self.dimension, self.vertices, [self.edges[i] for i in keep]), keep

    def with_extra_loops(self, vertex: Vertex, gains, marking: str = "bar") -> "GainGraph":
        extra = [GainEdge(vertex, vertex, _gain_tuple(g), marking) for g in gains]
        return GainGraph(self.dimension, self.vertices, list(self.edges) + extra)

    # -- incidence structure ---------------------------------------------

    def incidence(self) -> np.ndarray:
        """|E| x |V| incidence matrix; loops give all-zero rows."""
        mat = np.zeros((self.num_edges, self.num_vertices))
        for row, e in enumerate(self.edges):
            if e.is_loop:
                continue
            mat[row, self._index[e.tail]] = -1.0
            mat[row, self._index[e.head]] = 1.0
        return mat

    def gain_matrix(self) -> np.ndarray:
        """d x |E| matrix whose column for edge e is its gain vector."""
        mat = np.zeros((self.dimension, self.num_edges))
        for col, e in enumerate(self.edges):
            mat[:, col] = e.gain
        return mat

    def incidence_zd(self) -> np.ndarray:
        """|E| x (|V|+d) incidence matrix with gains in the last d columns."""
        return np.hstack([self.incidence(), self.gain_matrix().T])

    # -- connectivity and gain rank ---------------------------------------

    def components(self) -> list[list[Vertex]]:
        remaining = set(self.vertices)
        adjacency: dict[Vertex, set[Vertex]] = {v: set() for v in self.vertices}
        for e in self.edges:
            adjacency[e.tail].add(e.head)
            adjacency[e.head].add(e.tail)
        comps = []
        for start in self.vertices:
            if start not in remaining:
                continue
            stack, comp = [start], []
            remaining.discard(start)
            while stack:
                v = stack.pop()
                comp.append(v)
                for w in adjacency[v]:
                    if w in remaining:
                        remaining.discard(w)
                        stack.append(w)
            comps.append(comp)
        return comps

    def is_connected(self) -> bool:
        return len(self.components()) == 1

    def _component_cycle_gains(self, comp: Sequence[Vertex]) -> list[tuple[int, ...]]:
        comp_set = set(comp)
        root = comp[0]
        potential: dict[Vertex, np.ndarray] = {root: np.zeros(self.dimension, dtype=object)}
        tree_edges: set[int] = set()
        frontier = [root]
        while frontier:
            nxt = []
            for idx, e in enumerate(self.edges):
                if idx in tree_edges or e.is_loop:
                    continue
                if e.tail in potential and e.head not in potential and e.tail in comp_set:
                    potential[e.head] = potential[e.tail] + np.array(e.gain, dtype=object)
                    tree_edges.add(idx)
                    nxt.append(e.head)
                elif e.head in potential and e.tail not in potential and e.head in comp_set:
                    potential[e.tail] = potential[e.head] - np.array(e.gain, dtype=object)
                    tree_edges.add(idx)
                    nxt.append(e.tail)
            if not nxt:
                break
            frontier = nxt
        gains = []
        for idx, e in enumerate(self.edges):
            if idx in tree_edges or e.tail not in comp_set:
                continue
            # closed walk root -> tail -> head -> root has gain phi(tail)+g-phi(head)
            cycle = potential[e.tail] + np.array(e.gain, dtype=object) - potential[e.head]
            gains.append(tuple(int(x) for x in cycle))
        return gains

    def gain_rank(self) -> int:
        """Rank of the gain group, maximised over connected components."""
        best = 0
        for comp in self.components():
            gains = self._component_cycle_gains(comp)
            if gains:
                best = max(best, smith_rank(np.array(gains, dtype=object)))
        return best

    def full_rank_condition(self, tol: Optional[ToleranceVault] = None) -> tuple[bool, int]:
        """Check connected + gain rank d, cross-validated against rank I_zd.

        The combinatorial side and the numeric rank of the extended
        incidence matrix are computed independently (exact integers vs. SVD);
        disagreement is a bug, not bad input, and raises
        :class:`InternalInconsistency`.
        """
        tol = tol or ToleranceVault()
        holds = self.is_connected() and self.gain_rank() == self.dimension
        rank = numeric_rank(self.incidence_zd(), tol).rank
        expected = self.num_vertices - 1 + self.dimension
        if holds != (rank == expected):
            raise InternalInconsistency(
                f"rank equivalence violated: holds={holds}, rank I_zd={rank}, "
                f"|V|-1+d={expected}"
            )
        return holds, rank

    # -- covering window and switching ------------------------------------

    def covering_window(self, window: int) -> "CoveringWindow":
        return CoveringWindow.build(self, window)

    def switch(self, vertex: Vertex, mu) -> "GainGraph":
        """Re-gauge gains around ``vertex``: +mu entering, -mu leaving, loops fixed."""
        if vertex not in self._index:
            raise ValueError(f"unknown vertex {vertex!r}")
        mu = _gain_tuple(mu)
        if len(mu) != self.dimension:
            raise GainDimensionMismatch("switching vector has the wrong dimension")
        edges = []
        for e in self.edges:
            gain = e.gain
            if not e.is_loop:
                if e.head == vertex:
                    gain = tuple(g + m for g, m in zip(gain, mu))
                elif e.tail == vertex:
                    gain = tuple(g - m for g, m in zip(gain, mu))
            edges.append(GainEdge(e.tail, e.head, gain, e.marking))
        return GainGraph(self.dimension, self.vertices, edges)


@dataclass(frozen=True)
class CoveringWindow:
    """Finite portion of the covering graph over shifts in [-w, w]^d."""

    graph: GainGraph = field(repr=False)
    window: int
    vertices: tuple[tuple[Vertex, tuple[int, ...]], ...]
    edges: tuple[tuple[tuple[Vertex, tuple[int, ...]], tuple[Vertex, tuple[int, ...]]], ...]

    @staticmethod
    def build(graph: GainGraph, window: int) -> "CoveringWindow":
        if window < 0:
            raise ValueError("window must be a nonnegative integer")
        shifts = list(
            itertools.product(range(-window, window + 1), repeat=graph.dimension)
        )
        nodes = [(v, shift) for v in graph.vertices for shift in shifts]
        node_set = set(nodes)
        node_pos = {n: i for i, n in enumerate(nodes)}
        edge_set = set()
        for v, shift in nodes:
            for other in CoveringWindow._neighbors(graph, v, shift):
                if other in node_set:
                    a, b = (v, shift), other
                    if node_pos[a] > node_pos[b]:
                        a, b = b, a
                    if a != b:
                        edge_set.add((a, b))
        edges = tuple(sorted(edge_set, key=lambda ab: (node_pos[ab[0]], node_pos[ab[1]])))
        return CoveringWindow(graph, window, tuple(nodes), edges)

    @staticmethod
    def _neighbors(graph: GainGraph, v: Vertex, shift: tuple[int, ...]):
        for e in graph.edges:
            if e.tail == v:
                yield (e.head, tuple(s + g for s, g in zip(shift, e.gain)))
            if e.head == v:
                yield (e.tail, tuple(s - g for s, g in zip(shift, e.gain)))

    def degree(self, node) -> int:
        return sum(1 for a, b in self.edges if a == node or b == node)

    def interior_vertices(self) -> list:
        """Window vertices all of whose covering neighbors stay in the window."""
        node_set = set(self.vertices)
        out = []
        for v, shift in self.vertices:
            if all(
                n in node_set for n in self._neighbors(self.graph, v, shift)
            ):
                out.append((v, shift))
        return out
