"""Independent brute-force ground truth for tiny instances.

Grid search over boxes for feasible sets and optima, plus a dense sphere
sweep for the pencil norm.  Deliberately shares no numerical kernels with
the main library: pencil values are re-summed with plain loops, and
eigenvalues for m <= 3 come from closed-form characteristic-polynomial
formulas instead of a LAPACK call, so this module stays an independent
witness.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

from .pencil import BmiProblem, MatrixPencil

_GRID_CAP = 10**7


def _pencil_value_loops(pencil: MatrixPencil, x: np.ndarray) -> np.ndarray:
    """p(x, xx') by explicit double-loop summation."""
    m, n = pencil.m, pencil.n
    P = np.array(pencil.F0, dtype=float, copy=True)
    for k in range(n):
        P = P + x[k] * pencil.K[k]
    for i in range(n):
        for j in range(n):
            P = P + x[i] * x[j] * pencil.L_block(i, j)
    return P


def _max_eig_closed_form(P: np.ndarray) -> float:
    """Largest eigenvalue of a symmetric matrix of order <= 3, closed form."""
    m = P.shape[0]
    if m == 1:
        return float(P[0, 0])
    if m == 2:
        a, b, d = P[0, 0], P[0, 1], P[1, 1]
        return float(0.5 * (a + d) + np.sqrt(0.25 * (a - d) ** 2 + b * b))
    if m == 3:
        p1 = P[0, 1] ** 2 + P[0, 2] ** 2 + P[1, 2] ** 2
        q = (P[0, 0] + P[1, 1] + P[2, 2]) / 3.0
        if p1 == 0.0:
            return float(max(P[0, 0], P[1, 1], P[2, 2]))
        p2 = (P[0, 0] - q) ** 2 + (P[1, 1] - q) ** 2 + (P[2, 2] - q) ** 2 + 2.0 * p1
        p = np.sqrt(p2 / 6.0)
        B = (P - q * np.eye(3)) / p
        detB = (
            B[0, 0] * (B[1, 1] * B[2, 2] - B[1, 2] * B[2, 1])
            - B[0, 1] * (B[1, 0] * B[2, 2] - B[1, 2] * B[2, 0])
            + B[0, 2] * (B[1, 0] * B[2, 1] - B[1, 1] * B[2, 0])
        )
        r = min(1.0, max(-1.0, detB / 2.0))
        phi = np.arccos(r) / 3.0
        return float(q + 2.0 * p * np.cos(phi))
    raise ValueError("closed-form eigenvalues cover m <= 3 only")


def _check_domain(pencil: MatrixPencil):
    if pencil.n > 3 or pencil.m > 3:
        raise ValueError("oracle supports n <= 3 and m <= 3 only")


def _grid_axes(box, resolution: float, n: int):
    lo = np.asarray(box[0], dtype=float).ravel()
    hi = np.asarray(box[1], dtype=float).ravel()
    if lo.size != n or hi.size != n:
        raise ValueError("box bounds must match the variable dimension")
    if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))) or np.any(hi < lo):
        raise ValueError("box bounds must be finite with hi >= lo")
    if resolution <= 0:
        raise ValueError("resolution must be positive")
    axes = []
    for k in range(n):
        count = int(np.floor((hi[k] - lo[k]) / resolution + 1e-9)) + 1
        axes.append(lo[k] + resolution * np.arange(count))
    total = int(np.prod([len(a) for a in axes]))
    if total > _GRID_CAP:
        raise ValueError(f"grid of {total} nodes exceeds the {_GRID_CAP} cap")
    return axes


def grid_feasible_set(problem: BmiProblem, box, resolution: float, tol: float = 0.0):
    """All grid nodes satisfying the bilinear constraint, in lexicographic order."""
    pen = problem.pencil
    _check_domain(pen)
    axes = _grid_axes(box, resolution, pen.n)
    out = []
    for combo in product(*axes):
        x = np.array(combo)
        if _max_eig_closed_form(_pencil_value_loops(pen, x)) <= tol:
            out.append(x)
    return out


def grid_optimum(problem: BmiProblem, box, resolution: float, tol: float = 0.0):
    """Best feasible grid node and its cost; (None, inf) when none is feasible."""
    pen = problem.pencil
    _check_domain(pen)
    axes = _grid_axes(box, resolution, pen.n)
    best_x, best_val = None, float("inf")
    for combo in product(*axes):
        x = np.array(combo)
        if _max_eig_closed_form(_pencil_value_loops(pen, x)) <= tol:
            val = float(np.dot(problem.c, x))
            if val < best_val:
                best_x, best_val = x, val
    return best_x, best_val


@dataclass(frozen=True)
class SphereNormBracket:
    """Sweep value plus a Lipschitz-certified upper bound on the true max."""

    lower: float
    upper: float
    witness_u: np.ndarray

    def certified(self, rel_tol: float = 1e-3) -> bool:
        return self.upper - self.lower <= rel_tol * max(1.0, abs(self.lower))


def sphere_pencil_norm(pencil: MatrixPencil, q: int, resolution: float) -> SphereNormBracket:
    """Dense sweep of the unit sphere for the pencil q-norm (m <= 3).

    The sampled maximum is always a valid lower bound; the upper bound adds
    the covering radius times a Lipschitz constant of the quadratic-form map.
    """
    if q not in (1, 2):
        raise ValueError("q must be 1 or 2")
    if pencil.m > 3:
        raise ValueError("sphere sweep supports m <= 3 only")
    if resolution <= 0:
        raise ValueError("resolution must be positive")
    m, n = pencil.m, pencil.n

    def value_at(u: np.ndarray) -> float:
        V = np.empty((n, n))
        for i in range(n):
            for j in range(n):
                B = pencil.L_block(i, j)
                acc = 0.0
                for a in range(m):
                    for b in range(m):
                        acc += u[a] * B[a, b] * u[b]
                V[i, j] = acc
        if q == 2:
            return float(np.sqrt(np.sum(V * V)))
        return float(np.max(np.sum(np.abs(V), axis=1)))

    if m == 1:
        u = np.array([1.0])
        v = value_at(u)
        return SphereNormBracket(v, v, u)

    if m == 2:
        count = int(np.ceil(np.pi / resolution))
        us = [np.array([np.cos(t), np.sin(t)]) for t in np.arange(count) * (np.pi / count)]
        cover = 0.5 * (np.pi / count)
    else:
        # latitude-longitude grid; chordal covering radius ~ resolution
        lats = np.arange(0.0, np.pi + resolution, resolution)
        us = []
        for th in lats:
            ring = max(1, int(np.ceil(2.0 * np.pi * max(np.sin(th), 1e-12) / resolution)))
            for kphi in range(ring):
                ph = 2.0 * np.pi * kphi / ring
                us.append(
                    np.array(
                        [np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)]
                    )
                )
            if len(us) > _GRID_CAP:
                raise ValueError("sphere grid exceeds the node cap; coarsen the resolution")
        cover = resolution

    best_v, best_u = -np.inf, None
    for u in us:
        v = value_at(u)
        if v > best_v:
            best_v, best_u = v, u

    acc = 0.0
    for i in range(n):
        for j in range(n):
            B = pencil.L_block(i, j)
            fro2 = 0.0
            for a in range(m):
                for b in range(m):
                    fro2 += B[a, b] * B[a, b]
            acc += fro2  # Frobenius dominates the spectral norm, no eigensolve needed
    lip = 2.0 * np.sqrt(acc)  # |u'Bu - w'Bw| <= 2 ||B||_2 ||u - w|| on the sphere
    if q == 1:
        lip *= np.sqrt(n)  # row sums vs Frobenius aggregation
    return SphereNormBracket(best_v, best_v + lip * cover, best_u)
