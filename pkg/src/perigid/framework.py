"""Realizations of gain graphs and their rigidity matrices.

A realization places the quotient vertices in d-space and picks a lattice
matrix whose columns are the period vectors.  Vector forms follow a fixed
layout: vertex coordinates in graph order, then the lattice columns
concatenated.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional

import numpy as np

from .errors import FlatLattice, NotAffinelySpanning
from .gain import GainGraph, Vertex
from .linalg import numeric_rank
from .tolerances import ToleranceVault


@dataclass
class Realization:
    """Vertex positions plus a lattice matrix (columns are period vectors)."""

    points: Mapping[Vertex, np.ndarray]
    lattice: np.ndarray

    def __post_init__(self) -> None:
        self.points = {v: np.asarray(p, dtype=float).reshape(-1) for v, p in self.points.items()}
        self.lattice = np.asarray(self.lattice, dtype=float)
        d = self.lattice.shape[0]
        if self.lattice.shape != (d, d):
            raise ValueError("lattice must be a square d x d matrix")
        for v, p in self.points.items():
            if p.shape != (d,):
                raise ValueError(f"point for {v!r} has wrong dimension")

    @property
    def dimension(self) -> int:
        return self.lattice.shape[0]

    def non_flat(self, tol: ToleranceVault) -> bool:
        return abs(float(np.linalg.det(self.lattice))) > tol.residual_tol

    def scaled(self, factor: float) -> "Realization":
        return Realization(
            {v: factor * p for v, p in self.points.items()}, factor * self.lattice
        )

    def transformed(self, matrix: np.ndarray, shift=None) -> "Realization":
        """Apply p -> Mp + x, L -> ML."""
        matrix = np.asarray(matrix, dtype=float)
        shift = np.zeros(self.dimension) if shift is None else np.asarray(shift, dtype=float)
        return Realization(
            {v: matrix @ p + shift for v, p in self.points.items()},
            matrix @ self.lattice,
        )


def point_matrix(graph: GainGraph, real: Realization) -> np.ndarray:
    """d x |V| coordinate matrix in graph vertex order."""
    return np.column_stack([real.points[v] for v in graph.vertices])


def rep_matrix(graph: GainGraph, real: Realization) -> np.ndarray:
    """The d x (|V|+d) matrix [P L]."""
    return np.hstack([point_matrix(graph, real), real.lattice])


def realization_vector(graph: GainGraph, real: Realization) -> np.ndarray:
    """Concatenated vector form [p; l] of length d|V| + d^2."""
    p = np.concatenate([real.points[v] for v in graph.vertices])
    ell = real.lattice.flatten(order="F")
    return np.concatenate([p, ell])


def realization_from_vector(graph: GainGraph, vec: np.ndarray) -> Realization:
    d = graph.dimension
    n = graph.num_vertices
    vec = np.asarray(vec, dtype=float).reshape(-1)
    if vec.size != d * n + d * d:
        raise ValueError("vector has the wrong length for this graph")
    points = {v: vec[d * i : d * (i + 1)] for i, v in enumerate(graph.vertices)}
    lattice = vec[d * n :].reshape(d, d, order="F")
    return Realization(points, lattice)


def is_affinely_spanning(graph: GainGraph, real: Realization, tol: ToleranceVault) -> bool:
    """True when the lattice translates of the points affinely span d-space.

    Equivalent test: the d x (|V|+d) matrix [P - p(v1) 1^T, L] has rank d.
    """
    P = point_matrix(graph, real)
    shifted = P - P[:, [0]]
    return numeric_rank(np.hstack([shifted, real.lattice]), tol).rank == real.dimension


def edge_vectors(graph: GainGraph, real: Realization) -> np.ndarray:
    """|E| x d array of edge vectors p(head) + L*gain - p(tail)."""
    out = np.zeros((graph.num_edges, graph.dimension))
    for i, e in enumerate(graph.edges):
        out[i] = real.points[e.head] + real.lattice @ np.array(e.gain, dtype=float) - real.points[e.tail]
    return out


def measurement(graph: GainGraph, real: Realization) -> np.ndarray:
    """Squared edge lengths in canonical edge order."""
    nu = edge_vectors(graph, real)
    return np.einsum("ij,ij->i", nu, nu)


def rigidity_matrix(graph: GainGraph, real: Realization) -> np.ndarray:
    """|E| x (d|V| + d^2) rigidity matrix; rows are half-derivatives of the measurement."""
    d = graph.dimension
    n = graph.num_vertices
    nu = edge_vectors(graph, real)
    mat = np.zeros((graph.num_edges, d * n + d * d))
    for i, e in enumerate(graph.edges):
        if not e.is_loop:
            ti, hi = graph.vertex_index(e.tail), graph.vertex_index(e.head)
            mat[i, d * ti : d * (ti + 1)] = -nu[i]
            mat[i, d * hi : d * (hi + 1)] = nu[i]
        for k, g in enumerate(e.gain):
            if g:
                mat[i, d * n + d * k : d * n + d * (k + 1)] = g * nu[i]
    return mat


def fixed_rigidity_matrix(graph: GainGraph, real: Realization) -> np.ndarray:
    """|E| x d|V| fixed-lattice rigidity matrix; loop rows vanish by cancellation."""
    d = graph.dimension
    nu = edge_vectors(graph, real)
    mat = np.zeros((graph.num_edges, d * graph.num_vertices))
    for i, e in enumerate(graph.edges):
        if e.is_loop:
            continue
        ti, hi = graph.vertex_index(e.tail), graph.vertex_index(e.head)
        mat[i, d * ti : d * (ti + 1)] = -nu[i]
        mat[i, d * hi : d * (hi + 1)] = nu[i]
    return mat


def volume_rigidity_matrix(graph: GainGraph, real: Realization, tol: ToleranceVault) -> np.ndarray:
    """Rigidity matrix extended by the half-gradient of -log|det L|."""
    if not real.non_flat(tol):
        raise FlatLattice("volume rigidity matrix needs a nonsingular lattice")
    d = graph.dimension
    base = rigidity_matrix(graph, real)
    extra = np.zeros(base.shape[1])
    inv_t = np.linalg.inv(real.lattice).T
    extra[d * graph.num_vertices :] = -0.5 * inv_t.flatten(order="F")
    return np.vstack([base, extra])


def trivial_motions(graph: GainGraph, real: Realization, tol: ToleranceVault) -> np.ndarray:
    """Basis (columns) of the d(d+1)/2 trivial motions: translations and rotations."""
    if not is_affinely_spanning(graph, real, tol):
        raise NotAffinelySpanning("trivial motions need an affinely spanning framework")
    d = graph.dimension
    n = graph.num_vertices
    cols = []
    for i in range(d):
        vec = np.zeros(d * n + d * d)
        vec[i : d * n : d] = 1.0
        cols.append(vec)
    for i in range(d):
        for j in range(i + 1, d):
            skew = np.zeros((d, d))
            skew[i, j], skew[j, i] = 1.0, -1.0
            moved = np.concatenate([skew @ real.points[v] for v in graph.vertices])
            cols.append(np.concatenate([moved, (skew @ real.lattice).flatten(order="F")]))
    return np.column_stack(cols)


def is_infinitesimally_rigid(graph: GainGraph, real: Realization, tol: ToleranceVault) -> bool:
    """Nullity of the rigidity matrix equals the count of rigid-body motions."""
    if not is_affinely_spanning(graph, real, tol):
        raise NotAffinelySpanning("infinitesimal rigidity needs an affinely spanning framework")
    d = graph.dimension
    cols = d * graph.num_vertices + d * d
    rank = numeric_rank(rigidity_matrix(graph, real), tol).rank
    return cols - rank == d * (d + 1) // 2


def is_fixed_lattice_inf_rigid(graph: GainGraph, real: Realization, tol: ToleranceVault) -> bool:
    """Kernel of the fixed-lattice rigidity matrix reduces to the d translations."""
    if not is_affinely_spanning(graph, real, tol):
        raise NotAffinelySpanning("fixed-lattice rigidity needs an affinely spanning framework")
    d = graph.dimension
    rank = numeric_rank(fixed_rigidity_matrix(graph, real), tol).rank
    return d * graph.num_vertices - rank == d


def random_realization(
    graph: GainGraph, tol: ToleranceVault, seed: Optional[int] = None
) -> Realization:
    """High-entropy stand-in for a generic realization; deterministic per seed.

    Coordinates and lattice entries are uniform on [1, 2); the lattice is
    redrawn in the measure-zero event that it comes out singular.
    """
    rng = np.random.default_rng(tol.rng_seed if seed is None else seed)
    d = graph.dimension
    points = {v: rng.uniform(1.0, 2.0, size=d) for v in graph.vertices}
    lattice = rng.uniform(1.0, 2.0, size=(d, d))
    while abs(float(np.linalg.det(lattice))) < tol.residual_tol:
        lattice = rng.uniform(1.0, 2.0, size=(d, d))
    return Realization(points, lattice)


def congruence_check(
    real_a: Realization, real_b: Realization, tol: ToleranceVault
) -> Optional[tuple[np.ndarray, np.ndarray]]:
    """Witnessing isometry (M orthogonal, x) with q = Mp + x and L' = ML, or None.

    Solved by orthogonal Procrustes on the stacked columns of [P L] after
    centering the points only; lattice columns are not translated.  Both
    rotations and reflections are admitted.
    """
    if set(real_a.points) != set(real_b.points) or real_a.dimension != real_b.dimension:
        raise ValueError("congruence check needs realizations of the same graph")
    order = list(real_a.points)
    pa = np.column_stack([real_a.points[v] for v in order])
    pb = np.column_stack([real_b.points[v] for v in order])
    ca, cb = pa.mean(axis=1, keepdims=True), pb.mean(axis=1, keepdims=True)
    stack_a = np.hstack([pa - ca, real_a.lattice])
    stack_b = np.hstack([pb - cb, real_b.lattice])
    u, _, vt = np.linalg.svd(stack_b @ stack_a.T)
    rot = u @ vt
    shift = (cb - rot @ ca).reshape(-1)
    scale = max(1.0, float(np.abs(stack_a).max()), float(np.abs(cb).max(initial=0.0)))
    residual = max(
        float(np.abs(rot @ pa + shift[:, None] - pb).max()),
        float(np.abs(rot @ real_a.lattice - real_b.lattice).max()),
    )
    if residual <= tol.residual_tol * scale:
        return rot, shift
    return None
