"""Assembly of the lifted convex relaxations and their penalized variants.

The lifted problem keeps the linear objective and the linear matrix
inequality p(x, X) <= 0, and replaces the coupling X = xx' by membership of
X - xx' in one of the three cones.  Conic standard form uses exact
reformulations:

  SDP        one psd(n+1) block on [[1, x'], [x, X]]         (Schur complement)
  SOCP       one psd(3) block per pair on the bordered 2x2 principal
             submatrix, plus one rotated-cone block per diagonal
  PARABOLIC  rotated-cone blocks for X_ii >= x_i^2 and for
             X_ii + X_jj -+ 2 X_ij >= (x_i -+ x_j)^2

The penalty adds eta (tr X - 2 xc'x + xc'xc) to the objective; the constant
term is retained so reported objectives match the penalized formulation
verbatim.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse

from . import solver as _solver
from ._sym import svec, svec_dim, triu_index_map
from .cones import ConeBlock, ConeBlockSpec, ConeKind
from .pencil import BmiProblem, MatrixPencil

LMI_BLOCK = "lmi"


@dataclass(frozen=True)
class PenaltyConfig:
    """Penalty center and weight for the penalized relaxation."""

    x_check: np.ndarray
    eta: float

    def __post_init__(self):
        x = np.asarray(self.x_check, dtype=float).ravel()
        if not np.all(np.isfinite(x)):
            raise ValueError("penalty center must be finite")
        if not self.eta > 0:
            raise ValueError("penalty weight eta must be positive")
        object.__setattr__(self, "x_check", x)
        object.__setattr__(self, "eta", float(self.eta))


@dataclass(frozen=True)
class ConeProgram:
    """A relaxation in solver standard form plus the maps back to (x, X)."""

    n: int
    m: int
    kind: ConeKind
    num_vars: int
    cost: np.ndarray
    A: scipy.sparse.csr_matrix
    rhs: np.ndarray
    cone_spec: ConeBlockSpec
    x_vars: np.ndarray
    X_vars: dict[tuple[int, int], int]
    lmi_block: str
    obj_constant: float
    penalty: PenaltyConfig | None


@dataclass
class RelaxSolution:
    """Recovered primal pair, LMI multiplier, and solve diagnostics."""

    x: np.ndarray
    X: np.ndarray
    Lambda: np.ndarray
    objective: float
    status: str
    primal_residual: float
    dual_residual: float
    gap_residual: float
    iterations: int


class RelaxationError(RuntimeError):
    """A relaxation solve ended in a non-optimal status."""

    def __init__(self, status: str, solution: RelaxSolution | None = None):
        super().__init__(f"relaxation solve ended with status {status!r}")
        self.status = status
        self.solution = solution


def _var_layout(n: int) -> tuple[np.ndarray, dict[tuple[int, int], int]]:
    x_vars = np.arange(n)
    X_vars = {}
    pos = n
    for i in range(n):
        for j in range(i, n):
            X_vars[(i, j)] = pos
            pos += 1
    return x_vars, X_vars


def build_relaxation(
    problem: BmiProblem, kind: ConeKind, penalty: PenaltyConfig | None = None
) -> ConeProgram:
    """Encode one relaxation of the problem in solver standard form."""
    pen: MatrixPencil = problem.pencil
    n, m = pen.n, pen.m
    if penalty is not None and penalty.x_check.size != n:
        raise ValueError("penalty center dimension mismatch")

    x_vars, X_vars = _var_layout(n)
    num_vars = n + len(X_vars)

    cost = np.zeros(num_vars)
    cost[:n] = problem.c
    obj_constant = 0.0
    if penalty is not None:
        cost[:n] -= 2.0 * penalty.eta * penalty.x_check
        for i in range(n):
            cost[X_vars[(i, i)]] += penalty.eta
        obj_constant = penalty.eta * float(penalty.x_check @ penalty.x_check)

    rows: list[np.ndarray] = []
    rhs_parts: list[np.ndarray] = []
    blocks: list[ConeBlock] = []

    def add_block(block: ConeBlock, A_part: np.ndarray, b_part: np.ndarray):
        blocks.append(block)
        rows.append(A_part)
        rhs_parts.append(b_part)

    # LMI block: slack svec(-p(x, X)) in psd(m)
    lmi_rows = svec_dim(m)
    A_lmi = np.zeros((lmi_rows, num_vars))
    for k in range(n):
        A_lmi[:, k] = svec(pen.K[k])
    for (i, j), block in pen.L.items():
        w = 1.0 if i == j else 2.0
        A_lmi[:, X_vars[(i, j)]] = svec(w * block)
    add_block(ConeBlock("psd", m, LMI_BLOCK), A_lmi, svec(-pen.F0))

    idx = triu_index_map  # alias

    if kind == ConeKind.SDP:
        # [[1, x'], [x, X]] psd; slack rows are svec of that matrix
        order = n + 1
        pos = idx(order)
        r = svec_dim(order)
        A_blk = np.zeros((r, num_vars))
        b_blk = np.zeros(r)
        b_blk[pos[(0, 0)]] = 1.0
        for k in range(n):
            A_blk[pos[(0, k + 1)], k] = -np.sqrt(2.0)
        for (i, j), var in X_vars.items():
            A_blk[pos[(i + 1, j + 1)], var] = -1.0 if i == j else -np.sqrt(2.0)
        add_block(ConeBlock("psd", order, "lift"), A_blk, b_blk)
    elif kind == ConeKind.SOCP:
        pos3 = idx(3)
        for i in range(n):
            for j in range(i + 1, n):
                r = svec_dim(3)
                A_blk = np.zeros((r, num_vars))
                b_blk = np.zeros(r)
                b_blk[pos3[(0, 0)]] = 1.0
                A_blk[pos3[(0, 1)], i] = -np.sqrt(2.0)
                A_blk[pos3[(0, 2)], j] = -np.sqrt(2.0)
                A_blk[pos3[(1, 1)], X_vars[(i, i)]] = -1.0
                A_blk[pos3[(1, 2)], X_vars[(i, j)]] = -np.sqrt(2.0)
                A_blk[pos3[(2, 2)], X_vars[(j, j)]] = -1.0
                add_block(ConeBlock("psd", 3, f"pair_{i}_{j}"), A_blk, b_blk)
        for i in range(n):
            add_block(ConeBlock("rsoc", 3, f"diag_{i}"), *_rsoc_diag(num_vars, X_vars, i))
    elif kind == ConeKind.PARABOLIC:
        for i in range(n):
            add_block(ConeBlock("rsoc", 3, f"diag_{i}"), *_rsoc_diag(num_vars, X_vars, i))
        for i in range(n):
            for j in range(i + 1, n):
                for sign, tag in ((-1.0, "diff"), (+1.0, "sum")):
                    # X_ii + X_jj + 2 sign X_ij >= (x_i + sign x_j)^2
                    A_blk = np.zeros((3, num_vars))
                    b_blk = np.zeros(3)
                    A_blk[0, X_vars[(i, i)]] = -1.0
                    A_blk[0, X_vars[(j, j)]] = -1.0
                    A_blk[0, X_vars[(i, j)]] = -2.0 * sign
                    b_blk[1] = 0.5
                    A_blk[2, i] = -1.0
                    A_blk[2, j] = -sign
                    add_block(ConeBlock("rsoc", 3, f"par_{tag}_{i}_{j}"), A_blk, b_blk)
    else:
        raise ValueError(f"unknown cone kind {kind!r}")

    A = scipy.sparse.csr_matrix(np.vstack(rows))
    rhs = np.concatenate(rhs_parts)
    return ConeProgram(
        n=n,
        m=m,
        kind=kind,
        num_vars=num_vars,
        cost=cost,
        A=A,
        rhs=rhs,
        cone_spec=ConeBlockSpec(tuple(blocks)),
        x_vars=x_vars,
        X_vars=X_vars,
        lmi_block=LMI_BLOCK,
        obj_constant=obj_constant,
        penalty=penalty,
    )


def _rsoc_diag(num_vars: int, X_vars: dict, i: int):
    """(X_ii, 1/2, x_i) in the rotated cone, enforcing X_ii >= x_i^2."""
    A_blk = np.zeros((3, num_vars))
    b_blk = np.zeros(3)
    A_blk[0, X_vars[(i, i)]] = -1.0
    b_blk[1] = 0.5
    A_blk[2, i] = -1.0
    return A_blk, b_blk


def solve_relaxation(
    program: ConeProgram, settings: _solver.SolverSettings | None = None
) -> RelaxSolution:
    """Run the solver and map the output back to (x, X, Lambda)."""
    res = _solver.solve(program.A, program.rhs, program.cost, program.cone_spec, settings)
    n = program.n
    x = res.z[program.x_vars].copy() if res.z.size else np.zeros(n)
    X = np.zeros((n, n))
    for (i, j), var in program.X_vars.items():
        X[i, j] = X[j, i] = res.z[var]
    if res.status in ("optimal", "inaccurate", "infeasible"):
        Lambda = _solver.dual_extract(res, program.lmi_block)
    else:
        Lambda = np.zeros((program.m, program.m))
    objective = float(program.cost @ res.z) + program.obj_constant
    return RelaxSolution(
        x=x,
        X=X,
        Lambda=Lambda,
        objective=objective,
        status=res.status,
        primal_residual=res.primal_residual,
        dual_residual=res.dual_residual,
        gap_residual=res.gap,
        iterations=res.iterations,
    )


def lower_bound(
    problem: BmiProblem, kind: ConeKind, settings: _solver.SolverSettings | None = None
) -> float:
    """Optimal value of the unpenalized relaxation (a global lower bound)."""
    sol = solve_relaxation(build_relaxation(problem, kind), settings)
    if sol.status != "optimal":
        raise RelaxationError(sol.status, sol)
    return sol.objective


@dataclass
class EtaSearchResult:
    """Outcome of the geometric penalty-weight search."""

    solution: RelaxSolution | None
    eta: float
    exact: bool
    trace: list[tuple[float, float, str]] = field(default_factory=list)

    @property
    def etas_tried(self) -> list[float]:
        return [row[0] for row in self.trace]


def exactness_gap(x: np.ndarray, X: np.ndarray) -> float:
    return float(np.linalg.norm(X - np.outer(x, x)))


def eta_search(
    problem: BmiProblem,
    kind: ConeKind,
    x_check: np.ndarray,
    eta0: float | None = None,
    max_doublings: int = 20,
    gap_rtol: float = 1e-6,
    settings: _solver.SolverSettings | None = None,
) -> EtaSearchResult:
    """Grow eta geometrically until the penalized relaxation solves exactly.

    Operationalizes "eta sufficiently large": eta in {eta0 * 2^t}, stopping at
    the first solve whose lifted matrix matches xx' to gap_rtol relative.
    """
    x_check = np.asarray(x_check, dtype=float).ravel()
    if eta0 is None:
        eta0 = max(1.0, float(np.linalg.norm(problem.c)))
    if eta0 <= 0:
        raise ValueError("eta0 must be positive")
    trace: list[tuple[float, float, str]] = []
    last = None
    for t in range(max_doublings + 1):
        eta = eta0 * (2.0**t)
        program = build_relaxation(problem, kind, PenaltyConfig(x_check, eta))
        sol = solve_relaxation(program, settings)
        gap = exactness_gap(sol.x, sol.X) if sol.status in ("optimal", "inaccurate") else float("inf")
        trace.append((eta, gap, sol.status))
        if sol.status == "infeasible":
            return EtaSearchResult(sol, eta, False, trace)
        if sol.status == "optimal" and gap <= gap_rtol * (1.0 + float(np.linalg.norm(sol.X))):
            return EtaSearchResult(sol, eta, True, trace)
        last = sol
    return EtaSearchResult(last, trace[-1][0], False, trace)
