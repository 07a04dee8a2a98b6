"""Membership, projections, and dual-cone machinery for the relaxation cones.

Three cones of symmetric matrices parameterize the relaxation family:

  SDP        H >= 0                                   (positive semidefinite)
  SOCP       H_ii >= 0 and H_ii H_jj >= H_ij^2        (2x2-minor conditions)
  PARABOLIC  H_ii >= 0 and H_ii + H_jj >= 2|H_ij|

The PSD cone is self-dual.  The parabolic dual is the set of diagonally
dominant matrices with nonnegative diagonal.  The SOCP dual is the set of
matrices decomposable as a sum of PSD blocks supported on principal 2x2
submatrices; membership is decided by a small conic feasibility solve.

The module also hosts the projection kernels (PSD / second-order /
rotated second-order) used by the solver's conic step.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from ._sym import SQRT2, require_symmetric, svec_dim


class ConeKind(enum.Enum):
    """Which convex set replaces the lifted coupling X - x x'."""

    SDP = "sdp"
    SOCP = "socp"
    PARABOLIC = "parabolic"


_PRIMITIVE_KINDS = ("zero", "nonneg", "soc", "rsoc", "psd")


@dataclass(frozen=True)
class ConeBlock:
    """One primitive cone block in solver standard form.

    `size` is the vector dimension for zero/nonneg/soc/rsoc and the matrix
    order for psd blocks (whose slacks travel in svec coordinates).
    """

    kind: str
    size: int
    label: str = ""

    def __post_init__(self):
        if self.kind not in _PRIMITIVE_KINDS:
            raise ValueError(f"unknown cone block kind {self.kind!r}")
        if self.size < 1:
            raise ValueError("cone block size must be positive")
        if self.kind == "soc" and self.size < 2:
            raise ValueError("soc blocks need dimension >= 2")
        if self.kind == "rsoc" and self.size < 3:
            raise ValueError("rsoc blocks need dimension >= 3")

    @property
    def rows(self) -> int:
        return svec_dim(self.size) if self.kind == "psd" else self.size


@dataclass(frozen=True)
class ConeBlockSpec:
    """Ordered product of primitive cone blocks."""

    blocks: tuple[ConeBlock, ...]

    def __post_init__(self):
        object.__setattr__(self, "blocks", tuple(self.blocks))

    @property
    def total_rows(self) -> int:
        return sum(b.rows for b in self.blocks)

    def slices(self) -> list[tuple[ConeBlock, slice]]:
        out, start = [], 0
        for b in self.blocks:
            out.append((b, slice(start, start + b.rows)))
            start += b.rows
        return out

    def find(self, block) -> tuple[ConeBlock, slice]:
        """Locate a block by label or positional index."""
        pairs = self.slices()
        if isinstance(block, int):
            if not 0 <= block < len(pairs):
                raise KeyError(f"block index {block} out of range")
            return pairs[block]
        for b, sl in pairs:
            if b.label == block:
                return b, sl
        raise KeyError(f"no cone block labeled {block!r}")


# ---------------------------------------------------------------------------
# membership


def member(kind: ConeKind, H: np.ndarray, tol: float = 1e-8, scale: float = 1.0) -> bool:
    """Test H against the cone; tolerances are absolute on unit-scaled data.

    `scale` loosens the quadratic minor test of the SOCP cone, whose residual
    carries squared units.
    """
    H = require_symmetric(H, "H")
    if kind == ConeKind.SDP:
        return float(np.linalg.eigvalsh(H)[0]) >= -tol
    d = np.diag(H)
    if np.min(d) < -tol:
        return False
    if kind == ConeKind.SOCP:
        minors = np.outer(d, d) - H**2
        return bool(np.all(minors >= -tol * scale))
    if kind == ConeKind.PARABOLIC:
        sums = d[:, None] + d[None, :]
        return bool(np.all(sums - 2.0 * np.abs(H) >= -tol))
    raise ValueError(f"unknown cone kind {kind!r}")


def dual_member(kind: ConeKind, G: np.ndarray, tol: float = 1e-8) -> tuple[bool, float]:
    """Membership of G in the dual cone, with a signed margin.

    SDP: margin is the minimum eigenvalue.  PARABOLIC: margin is the worst
    diagonal-dominance slack min_i (G_ii - sum_{j != i} |G_ij|).  SOCP: margin
    is the largest t such that G - tI still decomposes into PSD blocks on
    principal 2x2 supports, computed by a conic solve.
    """
    G = require_symmetric(G, "G")
    if kind == ConeKind.SDP:
        margin = float(np.linalg.eigvalsh(G)[0])
    elif kind == ConeKind.PARABOLIC:
        absG = np.abs(G)
        margin = float(np.min(np.diag(G) - (absG.sum(axis=1) - np.diag(absG))))
    elif kind == ConeKind.SOCP:
        margin = socp_dual_margin(G)
    else:
        raise ValueError(f"unknown cone kind {kind!r}")
    return margin >= -tol, margin


def socp_dual_margin(G: np.ndarray, eps: float = 1e-9) -> float:
    """Largest t with G - tI decomposable into 2x2 principal PSD blocks.

    Off-diagonal entries pin the off-diagonals of each pair block, so only
    the split of the (shifted) diagonal among pairs is free; the maximal
    shift is found by a single conic solve.
    """
    from . import solver as _solver  # local import: solver projects via this module

    G = require_symmetric(G, "G")
    n = G.shape[0]
    if n == 1:
        return float(G[0, 0])

    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    nvar = 1 + 2 * len(pairs)  # t, then (a_i, a_j) per pair
    rows_zero = n
    rows_psd = 3 * len(pairs)
    A = np.zeros((rows_zero + rows_psd, nvar))
    b = np.zeros(rows_zero + rows_psd)

    # diagonal split: sum of a-parts touching i plus t equals G_ii
    for i in range(n):
        A[i, 0] = 1.0
        b[i] = G[i, i]
    for p, (i, j) in enumerate(pairs):
        A[i, 1 + 2 * p] = 1.0
        A[j, 2 + 2 * p] = 1.0
    # per-pair psd(2) slack [[a_i, G_ij], [G_ij, a_j]] in svec coordinates
    for p, (i, j) in enumerate(pairs):
        r = rows_zero + 3 * p
        A[r, 1 + 2 * p] = -1.0
        b[r + 1] = SQRT2 * G[i, j]
        A[r + 2, 2 + 2 * p] = -1.0

    c = np.zeros(nvar)
    c[0] = -1.0  # maximize t
    spec = ConeBlockSpec(
        (ConeBlock("zero", n, "diag"),)
        + tuple(ConeBlock("psd", 2, f"pair_{i}_{j}") for i, j in pairs)
    )
    settings = _solver.SolverSettings(eps_abs=eps, eps_rel=eps)
    res = _solver.solve(A, b, c, spec, settings)
    if res.status not in ("optimal", "inaccurate"):
        raise RuntimeError(f"SOCP dual-cone decomposition solve failed: status={res.status}")
    return float(res.z[0])


def socp_dual_sufficient_margin(G: np.ndarray) -> float:
    """Cheap conservative margin for the SOCP dual: split the diagonal evenly.

    Returns the worst eigenvalue over pairs of
    [[G_ii/(n-1), G_ij], [G_ij, G_jj/(n-1)]]; nonnegative implies membership.
    """
    G = require_symmetric(G, "G")
    n = G.shape[0]
    if n == 1:
        return float(G[0, 0])
    worst = np.inf
    for i in range(n):
        for j in range(i + 1, n):
            a, d, o = G[i, i] / (n - 1), G[j, j] / (n - 1), G[i, j]
            lam = 0.5 * (a + d) - np.sqrt(0.25 * (a - d) ** 2 + o**2)
            worst = min(worst, lam)
    return float(worst)


# ---------------------------------------------------------------------------
# projections


def project_psd(S: np.ndarray) -> np.ndarray:
    """Nearest PSD matrix in Frobenius norm (eigenvalue clipping)."""
    S = require_symmetric(S, "S")
    w, V = np.linalg.eigh(S)
    if w[0] >= 0.0:
        return S.copy()
    P = (V * np.maximum(w, 0.0)) @ V.T
    return 0.5 * (P + P.T)


def project_soc(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto {(t, w) : ||w||_2 <= t}."""
    v = np.asarray(v, dtype=float)
    if v.size < 2:
        raise ValueError("soc projection needs dimension >= 2")
    t, w = v[0], v[1:]
    nw = float(np.linalg.norm(w))
    if nw <= t:
        return v.copy()
    if nw <= -t:
        return np.zeros_like(v)
    coef = 0.5 * (1.0 + t / nw)
    out = np.empty_like(v)
    out[0] = 0.5 * (t + nw)
    out[1:] = coef * w
    return out


def project_rsoc(v: np.ndarray) -> np.ndarray:
    """Projection onto {(a, b, c) : 2ab >= ||c||^2, a >= 0, b >= 0}.

    Handled by the orthogonal involution (a, b) -> ((a+b)/sqrt2, (a-b)/sqrt2),
    which maps the rotated cone onto the plain second-order cone.
    """
    v = np.asarray(v, dtype=float)
    if v.size < 3:
        raise ValueError("rsoc projection needs dimension >= 3")
    u = v.copy()
    u[0] = (v[0] + v[1]) / SQRT2
    u[1] = (v[0] - v[1]) / SQRT2
    # soc coordinates are (t, rest); here t = u[0] and rest = u[1:]
    p = project_soc(u)
    out = p.copy()
    out[0] = (p[0] + p[1]) / SQRT2
    out[1] = (p[0] - p[1]) / SQRT2
    return out
