"""Scaled vectorization of symmetric matrices (svec) and small shared checks.

svec stacks the upper triangle row-major with off-diagonal entries scaled
by sqrt(2), so that <svec(U), svec(V)> equals the Frobenius inner product
<U, V>.  The PSD cone is self-dual in these coordinates, which is what the
solver's projection step relies on.
"""

from __future__ import annotations

import numpy as np

SQRT2 = float(np.sqrt(2.0))


def svec_dim(order: int) -> int:
    """Length of the svec vector for a symmetric matrix of the given order."""
    return order * (order + 1) // 2


def svec_order(dim: int) -> int:
    """Matrix order whose svec has length `dim`; raises if none does."""
    order = int(round((np.sqrt(8.0 * dim + 1.0) - 1.0) / 2.0))
    if svec_dim(order) != dim:
        raise ValueError(f"{dim} is not a valid svec length")
    return order


def svec(M: np.ndarray) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    iu = np.triu_indices(M.shape[0])
    v = M[iu].copy()
    v[iu[0] != iu[1]] *= SQRT2
    return v


def unsvec(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    order = svec_order(v.size)
    iu = np.triu_indices(order)
    w = v.copy()
    w[iu[0] != iu[1]] /= SQRT2
    M = np.zeros((order, order))
    M[iu] = w
    return M + np.triu(M, 1).T


def triu_index_map(order: int) -> dict[tuple[int, int], int]:
    """Map (i, j) with i <= j to its position in the svec ordering."""
    iu = np.triu_indices(order)
    return {(int(i), int(j)): pos for pos, (i, j) in enumerate(zip(*iu))}


def sym_defect(M: np.ndarray) -> float:
    """Relative Frobenius asymmetry of a square matrix."""
    M = np.asarray(M, dtype=float)
    denom = max(float(np.linalg.norm(M)), np.finfo(float).tiny)
    return float(np.linalg.norm(M - M.T)) / denom


def require_symmetric(M: np.ndarray, name: str, rtol: float = 1e-12) -> np.ndarray:
    """Validate shape and symmetry; returns the matrix as a float array.

    Asymmetry above `rtol` (relative to the matrix's own Frobenius norm) is
    rejected rather than repaired, so data-entry bugs surface early.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"{name} must be a square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError(f"{name} contains non-finite entries")
    if sym_defect(M) > rtol:
        raise ValueError(f"{name} is not symmetric (relative defect {sym_defect(M):.3e})")
    return M
