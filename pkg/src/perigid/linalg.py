"""Numeric and exact linear-algebra substrate.

Floating-point ranks, kernels and PSD tests all route through one tolerance
policy (:class:`~perigid.tolerances.ToleranceVault`); integer data gets exact
arbitrary-precision treatment so group-theoretic quantities carry no tolerance
at all.
"""

from __future__ import annotations

from fractions import Fraction
from typing import NamedTuple

import numpy as np

from .errors import AsymmetricInput, NonFiniteEntry
from .tolerances import ToleranceVault

# Singular-value ratio below which a rank cut is reported as marginal.
RANK_GAP_GUARD = 1e3


class RankResult(NamedTuple):
    rank: int
    singular_values: np.ndarray
    marginal: bool


class PsdResult(NamedTuple):
    is_psd: bool
    min_eigenvalue: float


def _as_float_matrix(matrix) -> np.ndarray:
    m = np.asarray(matrix, dtype=float)
    if m.ndim != 2:
        raise ValueError(f"expected a 2-d matrix, got ndim={m.ndim}")
    if not np.all(np.isfinite(m)):
        raise NonFiniteEntry("matrix contains NaN or infinite entries")
    return m


def numeric_rank(matrix, tol: ToleranceVault, scale_floor: float = 0.0) -> RankResult:
    """Rank of a real matrix from its singular values.

    A singular value counts toward the rank when it exceeds
    ``rank_rel_tol * max(rows, cols) * max(sigma_1, scale_floor)``.  The floor
    defaults to zero (purely relative rule); callers that know the natural
    scale of the assembly pass it so matrices that cancel to zero up to
    floating noise rank as zero instead of as noise.  The result is flagged
    marginal when the ratio across the rank cut is below ``RANK_GAP_GUARD``,
    since a near-degenerate cut should be surfaced rather than silently
    decided.
    """
    m = _as_float_matrix(matrix)
    if m.size == 0:
        return RankResult(0, np.zeros(0), False)
    svals = np.linalg.svd(m, compute_uv=False)
    if svals[0] == 0.0:
        return RankResult(0, svals, False)
    threshold = tol.rank_rel_tol * max(m.shape) * max(svals[0], scale_floor)
    rank = int(np.sum(svals > threshold))
    marginal = False
    if 0 < rank < svals.size and svals[rank] > 0.0:
        marginal = bool(svals[rank - 1] / svals[rank] < RANK_GAP_GUARD)
    return RankResult(rank, svals, marginal)


def nullspace(matrix, side: str, tol: ToleranceVault) -> np.ndarray:
    """Orthonormal basis (as columns) of the right or left kernel of ``matrix``."""
    if side not in ("right", "left"):
        raise ValueError(f"side must be 'right' or 'left', got {side!r}")
    m = _as_float_matrix(matrix)
    rows, cols = m.shape
    dim = cols if side == "right" else rows
    if m.size == 0 or not np.any(m):
        return np.eye(dim)
    u, svals, vt = np.linalg.svd(m, full_matrices=True)
    threshold = tol.rank_rel_tol * max(m.shape) * svals[0]
    rank = int(np.sum(svals > threshold))
    if side == "right":
        return vt[rank:].T
    return u[:, rank:]


def psd_check(matrix, tol: ToleranceVault) -> PsdResult:
    """Decide positive semidefiniteness of a (nearly) symmetric matrix.

    Raises :class:`AsymmetricInput` when the asymmetry exceeds
    ``residual_tol * (1 + |S|)``; otherwise symmetrizes before the eigensolve.
    """
    m = _as_float_matrix(matrix)
    if m.shape[0] != m.shape[1]:
        raise ValueError("psd_check needs a square matrix")
    if m.size == 0:
        return PsdResult(True, 0.0)
    scale = 1.0 + float(np.abs(m).max())
    asym = float(np.abs(m - m.T).max())
    if asym > tol.residual_tol * scale:
        raise AsymmetricInput(f"asymmetry {asym:g} exceeds tolerance")
    sym = 0.5 * (m + m.T)
    eigs = np.linalg.eigvalsh(sym)
    lam_min = float(eigs[0])
    lam_max = float(eigs[-1])
    is_psd = lam_min >= -tol.psd_slack * max(1.0, lam_max)
    return PsdResult(bool(is_psd), lam_min)


def _as_int_rows(matrix) -> list[list[int]]:
    arr = np.asarray(matrix)
    if arr.size == 0:
        return []
    if arr.ndim != 2:
        raise ValueError("expected a 2-d integer matrix")
    if not np.issubdtype(arr.dtype, np.integer):
        if np.issubdtype(arr.dtype, np.floating) and np.all(arr == np.round(arr)):
            raise ValueError("smith_rank requires exact integer input, not floats")
        if arr.dtype == object:
            pass
        else:
            raise ValueError("smith_rank requires exact integer input")
    return [[int(x) for x in row] for row in arr.tolist()]


def smith_rank(matrix) -> int:
    """Exact rank of an integer matrix over the rationals.

    Gaussian elimination over arbitrary-precision rationals; no tolerance is
    involved, which is what makes gain-group ranks trustworthy.
    """
    rows = _as_int_rows(matrix)
    if not rows:
        return 0
    work = [[Fraction(x) for x in row] for row in rows]
    nrows, ncols = len(work), len(work[0])
    rank = 0
    pivot_col = 0
    while rank < nrows and pivot_col < ncols:
        pivot_row = next(
            (r for r in range(rank, nrows) if work[r][pivot_col] != 0), None
        )
        if pivot_row is None:
            pivot_col += 1
            continue
        work[rank], work[pivot_row] = work[pivot_row], work[rank]
        pivot = work[rank][pivot_col]
        for r in range(rank + 1, nrows):
            factor = work[r][pivot_col] / pivot
            if factor:
                for c in range(pivot_col, ncols):
                    work[r][c] -= factor * work[rank][c]
        rank += 1
        pivot_col += 1
    return rank


def orthonormalize_rows(rows: np.ndarray, tol: ToleranceVault) -> np.ndarray:
    """Orthonormal basis (as rows) of the row space of ``rows``."""
    m = _as_float_matrix(rows)
    if m.size == 0:
        return m.reshape(0, m.shape[1] if m.ndim == 2 else 0)
    u, svals, vt = np.linalg.svd(m, full_matrices=False)
    if svals.size == 0 or svals[0] == 0.0:
        return np.zeros((0, m.shape[1]))
    threshold = tol.rank_rel_tol * max(m.shape) * svals[0]
    rank = int(np.sum(svals > threshold))
    return vt[:rank]
