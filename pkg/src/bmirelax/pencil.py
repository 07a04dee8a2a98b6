"""Matrix pencils and the maps derived from them.

The pencil  p(x, X) = F0 + sum_k x_k K_k + sum_ij X_ij L_ij  carries the
whole constraint geometry: the bilinear constraint is p(x, xx') <= 0 (in
the semidefinite order).  This module evaluates p, the derivative of its
bilinear part, the adjoint map that contracts a multiplier against the
bilinear blocks, the pencil norm, and the constraint-qualification
programs (MFCQ and its generalization to infeasible points).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import solver as _solver
from ._sym import require_symmetric, svec, svec_dim
from .cones import ConeBlock, ConeBlockSpec

SYM_RTOL = 1e-12


class SolveFailed(RuntimeError):
    """A subsidiary conic solve did not reach an acceptable status."""

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


def _normalized_bilinear_table(n, m, L) -> dict[tuple[int, int], np.ndarray]:
    table: dict[tuple[int, int], np.ndarray] = {}
    for key, block in L.items():
        i, j = int(key[0]), int(key[1])
        if not (0 <= i < n and 0 <= j < n):
            raise ValueError(f"bilinear index {key} out of range for n={n}")
        pair = (i, j) if i <= j else (j, i)
        if pair in table:
            raise ValueError(f"duplicate bilinear pair {pair}")
        B = require_symmetric(block, f"L[{pair}]", SYM_RTOL)
        if B.shape != (m, m):
            raise ValueError(f"L[{pair}] must be {m}x{m}, got {B.shape}")
        table[pair] = B
    return dict(sorted(table.items()))


@dataclass(frozen=True)
class MatrixPencil:
    """Data (F0, {K_k}, {L_ij}) of one pencil.

    L is stored once per unordered pair (i <= j, 0-based); absent pairs are
    zero.  All blocks must be m x m and symmetric to 1e-12 relative; inputs
    violating that are rejected rather than silently repaired.
    """

    n: int
    m: int
    F0: np.ndarray
    K: tuple[np.ndarray, ...]
    L: dict[tuple[int, int], np.ndarray]

    def __post_init__(self):
        if self.n < 1 or self.m < 1:
            raise ValueError("pencil needs n >= 1 and m >= 1")
        F0 = require_symmetric(self.F0, "F0", SYM_RTOL)
        if F0.shape != (self.m, self.m):
            raise ValueError(f"F0 must be {self.m}x{self.m}, got {F0.shape}")
        K = tuple(np.asarray(Kk, dtype=float) for Kk in self.K)
        if len(K) != self.n:
            raise ValueError(f"expected {self.n} K blocks, got {len(K)}")
        for k, Kk in enumerate(K):
            Kk = require_symmetric(Kk, f"K[{k}]", SYM_RTOL)
            if Kk.shape != (self.m, self.m):
                raise ValueError(f"K[{k}] must be {self.m}x{self.m}")
        object.__setattr__(self, "F0", F0)
        object.__setattr__(self, "K", K)
        object.__setattr__(self, "L", _normalized_bilinear_table(self.n, self.m, self.L))

    def L_block(self, i: int, j: int) -> np.ndarray:
        """L_ij (= L_ji); zero matrix for pairs without stored data."""
        if not (0 <= i < self.n and 0 <= j < self.n):
            raise IndexError(f"bilinear index ({i}, {j}) out of range")
        pair = (i, j) if i <= j else (j, i)
        block = self.L.get(pair)
        return np.zeros((self.m, self.m)) if block is None else block


@dataclass(frozen=True)
class BmiProblem:
    """Linear cost c'x under the constraint p(x, xx') <= 0."""

    c: np.ndarray
    pencil: MatrixPencil

    def __post_init__(self):
        c = np.asarray(self.c, dtype=float).ravel()
        if c.size != self.pencil.n:
            raise ValueError(f"cost length {c.size} != pencil n {self.pencil.n}")
        if not np.all(np.isfinite(c)):
            raise ValueError("cost vector must be finite")
        object.__setattr__(self, "c", c)


@dataclass(frozen=True)
class LiftedPoint:
    """A point (x, X) of the lifted space; X plays the role of xx'."""

    x: np.ndarray
    X: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float).ravel()
        X = require_symmetric(self.X, "X", SYM_RTOL)
        if X.shape != (x.size, x.size):
            raise ValueError(f"X must be {x.size}x{x.size}, got {X.shape}")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "X", X)


@dataclass(frozen=True)
class PencilNormEstimate:
    """Estimated max over unit u of the q-norm of [u' L_ij u].

    kind 'exact' means the value was certified (m = 1 closed form, or a dense
    sphere sweep confirmed the incumbent); 'lower_bound' means multi-start
    ascent only.  The witness always achieves the reported value.
    """

    q: int
    value: float
    kind: str
    witness_u: np.ndarray


# ---------------------------------------------------------------------------
# evaluation maps


def eval_pencil(pencil: MatrixPencil, point: LiftedPoint) -> np.ndarray:
    """F0 + sum_k x_k K_k + sum_ij X_ij L_ij, symmetrized."""
    x, X = point.x, point.X
    if x.size != pencil.n:
        raise ValueError(f"point dimension {x.size} != pencil n {pencil.n}")
    P = pencil.F0.copy()
    for k in range(pencil.n):
        P += x[k] * pencil.K[k]
    for (i, j), block in pencil.L.items():
        w = X[i, j] if i == j else 2.0 * X[i, j]
        P += w * block
    return 0.5 * (P + P.T)


def eval_bilinear(pencil: MatrixPencil, x: np.ndarray) -> np.ndarray:
    """p(x, xx'): the pencil along the bilinear manifold."""
    x = np.asarray(x, dtype=float).ravel()
    return eval_pencil(pencil, LiftedPoint(x, np.outer(x, x)))


def bmi_feasible(pencil: MatrixPencil, x: np.ndarray, tol: float = 0.0) -> bool:
    """True iff the largest eigenvalue of p(x, xx') is at most tol."""
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    return float(np.linalg.eigvalsh(eval_bilinear(pencil, x))[-1]) <= tol


def bilinear_derivative(pencil: MatrixPencil, x: np.ndarray, k: int) -> np.ndarray:
    """Derivative of the bilinear part with respect to x_k: 2 sum_i x_i L_ki."""
    x = np.asarray(x, dtype=float).ravel()
    if x.size != pencil.n:
        raise ValueError(f"point dimension {x.size} != pencil n {pencil.n}")
    if not 0 <= k < pencil.n:
        raise IndexError(f"index k={k} out of range [0, {pencil.n})")
    D = np.zeros((pencil.m, pencil.m))
    for (i, j), block in pencil.L.items():
        if i == j == k:
            D += 2.0 * x[k] * block
        elif i == k:
            D += 2.0 * x[j] * block
        elif j == k:
            D += 2.0 * x[i] * block
    return D


def bilinear_adjoint(pencil: MatrixPencil, Lambda: np.ndarray) -> np.ndarray:
    """The n x n matrix [<L_ij, Lambda>]_ij for a symmetric multiplier."""
    Lambda = require_symmetric(Lambda, "Lambda", 1e-10)
    if Lambda.shape != (pencil.m, pencil.m):
        raise ValueError(f"Lambda must be {pencil.m}x{pencil.m}, got {Lambda.shape}")
    A = np.zeros((pencil.n, pencil.n))
    for (i, j), block in pencil.L.items():
        val = float(np.sum(block * Lambda))
        A[i, j] = val
        A[j, i] = val
    return A


def induced_norm(M: np.ndarray, q: int) -> float:
    """Induced q-norm used by the dual-cone bounds: spectral for q=2,
    maximum absolute row sum for q=1."""
    M = np.asarray(M, dtype=float)
    if q == 2:
        return float(np.linalg.norm(M, 2))
    if q == 1:
        return float(np.max(np.abs(M).sum(axis=1))) if M.size else 0.0
    raise ValueError("q must be 1 or 2")


# ---------------------------------------------------------------------------
# pencil norm


def _quad_table(pencil: MatrixPencil) -> np.ndarray:
    """Dense (n, n, m, m) table of L blocks (both orders filled)."""
    T = np.zeros((pencil.n, pencil.n, pencil.m, pencil.m))
    for (i, j), block in pencil.L.items():
        T[i, j] = block
        T[j, i] = block
    return T


def _qvalue(T: np.ndarray, u: np.ndarray, q: int) -> float:
    V = np.einsum("ijab,a,b->ij", T, u, u)
    if q == 2:
        return float(np.linalg.norm(V))
    return float(np.max(np.abs(V).sum(axis=1)))


def _ascend(T: np.ndarray, u: np.ndarray, q: int, iters: int = 200) -> tuple[float, np.ndarray]:
    """Projected gradient ascent for f(u) = q-norm of [u' L_ij u] on the sphere."""
    u = u / np.linalg.norm(u)
    val = _qvalue(T, u, q)
    step = 0.5
    for _ in range(iters):
        V = np.einsum("ijab,a,b->ij", T, u, u)
        if q == 2:
            nv = np.linalg.norm(V)
            W = V / nv if nv > 0 else V
        else:
            rows = np.abs(V).sum(axis=1)
            top = int(np.argmax(rows))
            W = np.zeros_like(V)
            W[top] = np.sign(V[top])
        grad = 2.0 * np.einsum("ij,ijab,b->a", W, T, u)
        cand = u + step * grad
        nc = np.linalg.norm(cand)
        if nc == 0.0:
            break
        cand /= nc
        cval = _qvalue(T, cand, q)
        if cval > val + 1e-15:
            u, val = cand, cval
            step *= 1.2
        else:
            step *= 0.5
            if step < 1e-12:
                break
    return val, u


def _fibonacci_sphere(count: int) -> np.ndarray:
    i = np.arange(count)
    z = 1.0 - (2.0 * i + 1.0) / count
    phi = i * np.pi * (3.0 - np.sqrt(5.0))
    r = np.sqrt(np.maximum(1.0 - z * z, 0.0))
    return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])


def _sweep_max(T: np.ndarray, q: int, m: int, resolution: float) -> tuple[float, np.ndarray]:
    """Dense sweep of the unit sphere (m = 2 or 3), vectorized in chunks."""
    if m == 2:
        theta = np.arange(0.0, np.pi, resolution)
        U = np.column_stack([np.cos(theta), np.sin(theta)])
    else:
        count = int(np.ceil((2.6 / resolution) ** 2))
        U = _fibonacci_sphere(count)
    best_val, best_u = -np.inf, None
    for start in range(0, U.shape[0], 200_000):
        chunk = U[start : start + 200_000]
        V = np.einsum("ijab,na,nb->nij", T, chunk, chunk)
        if q == 2:
            vals = np.linalg.norm(V.reshape(len(chunk), -1), axis=1)
        else:
            vals = np.abs(V).sum(axis=2).max(axis=1)
        k = int(np.argmax(vals))
        if vals[k] > best_val:
            best_val, best_u = float(vals[k]), chunk[k].copy()
    return best_val, best_u


def pencil_norm(
    pencil: MatrixPencil, q: int, budget: int = 10, seed: int = 0
) -> PencilNormEstimate:
    """Estimate the pencil q-norm by multi-start projected gradient ascent.

    m = 1 is closed form (u = +-1).  For m <= 3 a dense sphere sweep at
    resolution 1e-3 confirms the incumbent, upgrading the estimate to
    'exact' (within 1e-3 relative).  Otherwise the result is a certified
    lower bound: the witness attains it, the maximum may be larger.
    """
    if q not in (1, 2):
        raise ValueError("q must be 1 or 2")
    if budget < 1:
        raise ValueError("budget must be >= 1")
    m, n = pencil.m, pencil.n
    if m == 1:
        flat = np.array([[pencil.L_block(i, j)[0, 0] for j in range(n)] for i in range(n)])
        value = float(np.linalg.norm(flat)) if q == 2 else float(np.max(np.abs(flat).sum(axis=1)))
        return PencilNormEstimate(q, value, "exact", np.array([1.0]))

    T = _quad_table(pencil)
    if not np.any(T):
        return PencilNormEstimate(q, 0.0, "exact", np.eye(m)[0])

    rng = np.random.default_rng(seed)
    starts = [np.eye(m)[k] for k in range(m)]
    starts += [rng.standard_normal(m) for _ in range(budget)]
    best_val, best_u = -np.inf, None
    for u0 in starts:
        if np.linalg.norm(u0) == 0.0:
            continue
        val, u = _ascend(T, u0, q)
        if val > best_val:
            best_val, best_u = val, u

    kind = "lower_bound"
    if m <= 3:
        sweep_val, sweep_u = _sweep_max(T, q, m, 1e-3)
        if sweep_val > best_val:
            val, u = _ascend(T, sweep_u, q)
            if val > best_val:
                best_val, best_u = val, u
        if sweep_val <= best_val * (1.0 + 1e-3) + 1e-15:
            kind = "exact"
    return PencilNormEstimate(q, best_val, kind, best_u)


# ---------------------------------------------------------------------------
# constraint qualification programs


def _direction_program(pencil: MatrixPencil, Mks: list[np.ndarray], P0: np.ndarray):
    """Standard form of  max t  s.t.  -P0 - sum_k b_k M_k - t I >= 0, ||b|| <= 1."""
    n, m = pencil.n, pencil.m
    nvar = n + 1
    rows_psd = svec_dim(m)
    rows_soc = n + 1
    A = np.zeros((rows_psd + rows_soc, nvar))
    b_vec = np.zeros(rows_psd + rows_soc)
    for k in range(n):
        A[:rows_psd, k] = svec(Mks[k])
    A[:rows_psd, n] = svec(np.eye(m))
    b_vec[:rows_psd] = svec(-P0)
    b_vec[rows_psd] = 1.0  # soc head: constant 1
    for k in range(n):
        A[rows_psd + 1 + k, k] = -1.0
    c_vec = np.zeros(nvar)
    c_vec[n] = -1.0
    spec = ConeBlockSpec((ConeBlock("psd", m, "pencil"), ConeBlock("soc", n + 1, "ball")))
    return A, b_vec, c_vec, spec


def _solve_direction(pencil, Mks, P0, settings=None):
    A, b_vec, c_vec, spec = _direction_program(pencil, Mks, P0)
    settings = settings or _solver.SolverSettings(eps_abs=1e-9, eps_rel=1e-9)
    res = _solver.solve(A, b_vec, c_vec, spec, settings)
    if res.status not in ("optimal", "inaccurate"):
        raise SolveFailed(
            f"direction program returned status {res.status!r} "
            f"(residuals p={res.primal_residual:.2e} d={res.dual_residual:.2e})",
            res,
        )
    t = float(res.z[pencil.n])
    b_dir = res.z[: pencil.n].copy()
    return t, b_dir


def g_mfcq_s(pencil: MatrixPencil, x: np.ndarray, settings=None) -> tuple[float, np.ndarray]:
    """The constraint-qualification margin s(x) and its best direction.

    Solves  max t  s.t.  -sum_k b_k (K_k + bilinear_derivative(x)) >= t I  over the unit
    ball; on the sphere this is the maximal smallest eigenvalue, and the ball
    relaxation agrees whenever the value is positive.  The returned direction
    has unit norm whenever the value is positive.
    """
    x = np.asarray(x, dtype=float).ravel()
    Mks = [pencil.K[k] + bilinear_derivative(pencil, x, k) for k in range(pencil.n)]
    value, b_dir = _solve_direction(pencil, Mks, np.zeros((pencil.m, pencil.m)), settings)
    nb = float(np.linalg.norm(b_dir))
    if value > 0.0 and nb > 0.0:
        b_dir = b_dir / nb
    return value, b_dir


def mfcq_check(pencil: MatrixPencil, x: np.ndarray, settings=None) -> tuple[bool, np.ndarray]:
    """MFCQ at a feasible point: is there b with p + sum b_k (K_k + bilinear_derivative) < 0?

    The direction is bounded to the unit ball, which changes only the scale
    of the margin, not its sign.
    """
    x = np.asarray(x, dtype=float).ravel()
    if not bmi_feasible(pencil, x, 1e-8):
        raise ValueError("mfcq_check requires a feasible point (tolerance 1e-8)")
    P0 = eval_bilinear(pencil, x)
    Mks = [pencil.K[k] + bilinear_derivative(pencil, x, k) for k in range(pencil.n)]
    t, b_dir = _solve_direction(pencil, Mks, P0, settings)
    return t > 1e-8, b_dir
