"""Certificates: exactness, KKT residuals, dual-cone margins, recovery checks.

Certifies solver output against the optimality and feasibility-recovery
theory: the stationarity/complementarity system of the penalized problem,
the dual-cone condition on eta*I + bilinear_adjoint(Lambda), the trace-ratio
sufficient test (with its per-cone constants), and the distance/margin
threshold that guarantees feasibility recovery from an infeasible start.

Every verdict is three-way.  Feasibility distance is reported as a bracket
(certified lower bound, achieved upper bound), and a pencil norm that is
only a lower bound can never upgrade a verdict to "verified".
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import cones as _cones
from . import relaxation as _rx
from .pencil import (
    BmiProblem,
    MatrixPencil,
    PencilNormEstimate,
    bilinear_adjoint,
    bmi_feasible,
    eval_bilinear,
    g_mfcq_s,
    pencil_norm,
)

# recovery-threshold constants by cone; n is the variable dimension
_RECOVERY_CONSTANT = {
    _cones.ConeKind.SDP: lambda n: 0.25,
    _cones.ConeKind.SOCP: lambda n: 1.0 / (2.0 * n),
    _cones.ConeKind.PARABOLIC: lambda n: 1.0 / (2.0 + 2.0 * np.sqrt(n)),
}


def trace_ratio_constant(kind: _cones.ConeKind, n: int) -> float:
    """Trace-ratio constant; the SOCP value degenerates to the SDP one at n=1,
    where the pairwise decomposition has no pairs and the cones coincide."""
    if kind == _cones.ConeKind.SDP:
        return 1.0
    if kind == _cones.ConeKind.SOCP:
        return 1.0 if n == 1 else 1.0 / (n - 1.0)
    if kind == _cones.ConeKind.PARABOLIC:
        return 1.0 / np.sqrt(n)
    raise ValueError(f"unknown cone kind {kind!r}")


def recovery_constant(kind: _cones.ConeKind, n: int) -> float:
    return float(_RECOVERY_CONSTANT[kind](n))


@dataclass
class RecoveryCheck:
    """Threshold check for feasibility recovery from an infeasible start."""

    d_lower: float
    d_upper: float
    s_value: float
    threshold: float
    verdict: str  # verified | violated | inconclusive


@dataclass
class Certificate:
    """Everything the theory lets us check about one solved point."""

    kind: _cones.ConeKind
    eta: float
    exactness_gap: float
    bmi_violation: float
    kkt_stationarity: float
    kkt_compl_slack: float
    dual_margin: float
    dual_sufficient: bool
    trace_ratio: float
    trace_ratio_limit: float
    pencil_norm_value: float
    pencil_norm_kind: str
    objective_improved: bool
    recovery: RecoveryCheck | None = None
    eta_trace: list = field(default_factory=list)


def exactness(x: np.ndarray, X: np.ndarray, tol: float = 1e-6) -> tuple[bool, float]:
    """Is the lifted matrix the outer product of the point, to tolerance?"""
    x = np.asarray(x, dtype=float).ravel()
    X = np.asarray(X, dtype=float)
    gap = float(np.linalg.norm(X - np.outer(x, x)))
    return gap <= tol * (1.0 + float(np.linalg.norm(X))), gap


def bmi_violation(pencil: MatrixPencil, x: np.ndarray) -> float:
    """Largest eigenvalue of p(x, xx'), clipped at zero."""
    return max(0.0, float(np.linalg.eigvalsh(eval_bilinear(pencil, x))[-1]))


def kkt_residuals(
    problem: BmiProblem,
    x: np.ndarray,
    Lambda: np.ndarray,
    eta: float,
    x_check: np.ndarray,
) -> tuple[float, float]:
    """Stationarity and complementary-slackness residuals of the penalized
    problem at (x, Lambda):

      stationarity = || c + 2 eta (x - xc) + [<K_k, Lambda>]_k + 2 bilinear_adjoint(Lambda) x ||
      compl        = || Lambda p(x, xx') ||_F
    """
    pen = problem.pencil
    x = np.asarray(x, dtype=float).ravel()
    x_check = np.asarray(x_check, dtype=float).ravel()
    if x.size != pen.n or x_check.size != pen.n:
        raise ValueError("dimension mismatch in kkt_residuals")
    Lambda = np.asarray(Lambda, dtype=float)
    if Lambda.shape != (pen.m, pen.m):
        raise ValueError("Lambda dimension mismatch")
    kterm = np.array([float(np.sum(pen.K[k] * Lambda)) for k in range(pen.n)])
    grad = problem.c + 2.0 * eta * (x - x_check) + kterm + 2.0 * bilinear_adjoint(pen, Lambda) @ x
    compl = float(np.linalg.norm(Lambda @ eval_bilinear(pen, x)))
    return float(np.linalg.norm(grad)), compl


def dual_certificate(
    problem: BmiProblem,
    kind: _cones.ConeKind,
    Lambda: np.ndarray,
    eta: float,
    pnorm: PencilNormEstimate | None = None,
) -> tuple[float, bool]:
    """Margin of eta*I + bilinear_adjoint(Lambda) in the dual cone, plus the trace-ratio
    sufficient test: tr(Lambda)/eta at most the per-cone constant over the
    pencil norm.

    A lower-bound pencil norm makes the ratio threshold optimistic, so
    `sufficient` is reported True only when the norm is certified exact;
    with a lower bound it may be falsely False, never falsely True.
    """
    pen = problem.pencil
    G = eta * np.eye(pen.n) + bilinear_adjoint(pen, Lambda)
    _, margin = _cones.dual_member(kind, G)
    if pnorm is None:
        pnorm = pencil_norm(pen, 2)
    ratio = float(np.trace(np.asarray(Lambda, dtype=float))) / eta
    z = trace_ratio_constant(kind, pen.n)
    sufficient = False
    if pnorm.kind == "exact":
        threshold = np.inf if pnorm.value == 0.0 else z / pnorm.value
        sufficient = ratio <= threshold
    return margin, sufficient


@dataclass
class DistanceBracket:
    d_lower: float
    d_upper: float
    method: str  # bracket | upper_only | feasible_point


def feasibility_distance(
    problem: BmiProblem,
    x_check: np.ndarray,
    method: str = "auto",
    resolution: float = 1e-3,
    radius_margin: float = 1.25,
    settings=None,
) -> DistanceBracket:
    """Bracket the Euclidean distance from x_check to the feasible set.

    The upper bound comes from the exactness-seeking penalized solve with
    zero cost (any exact output is feasible); the lower bound from grid
    certification over a ball for n <= 3, discounted by the grid diameter.
    """
    pen = problem.pencil
    x_check = np.asarray(x_check, dtype=float).ravel()
    if bmi_feasible(pen, x_check, 1e-8):
        return DistanceBracket(0.0, 0.0, "feasible_point")

    zero_cost = BmiProblem(np.zeros(pen.n), pen)
    search = _rx.eta_search(
        zero_cost, _cones.ConeKind.SDP, x_check, eta0=1.0, settings=settings
    )
    if search.exact and search.solution is not None:
        x_near = search.solution.x
        d_upper = float(np.linalg.norm(x_near - x_check))
        viol = bmi_violation(pen, x_near)
        if viol > 0.0:
            s_val, _ = g_mfcq_s(pen, x_near)
            d_upper += viol / max(s_val, 1e-6)  # first-order repair allowance
    else:
        d_upper = float("inf")

    if method == "upper_only" or pen.n > 3:
        return DistanceBracket(0.0, d_upper, "upper_only")

    radius = radius_margin * d_upper if np.isfinite(d_upper) else 1.0
    # coarsen toward the node budget; a coarser grid only weakens d_lower,
    # which keeps the bracket valid
    per_axis = max(8, int(2e5 ** (1.0 / pen.n)))
    resolution = max(resolution, 2.0 * radius / per_axis)
    d_lower = _grid_distance_lower(pen, x_check, radius, resolution)
    d_lower = min(d_lower, d_upper)
    return DistanceBracket(d_lower, d_upper, "bracket")


def _grid_distance_lower(pencil: MatrixPencil, x_check, radius, resolution) -> float:
    """Certified distance lower bound: no feasible point lies closer than the
    nearest grid node whose pencil value could reach zero within the node's
    cell, minus the cell diameter."""
    n = pencil.n
    half_diam = 0.5 * resolution * np.sqrt(n)
    kappa = _pencil_lipschitz(pencil, float(np.linalg.norm(x_check)) + radius + half_diam)
    axes = []
    for i in range(n):
        lo = x_check[i] - radius
        hi = x_check[i] + radius
        count = max(2, int(np.ceil((hi - lo) / resolution)) + 1)
        axes.append(np.linspace(lo, hi, count))
    grid_total = int(np.prod([len(a) for a in axes]))
    if grid_total > 10**7:
        raise ValueError(f"grid of {grid_total} nodes exceeds the 1e7 cap")
    best = radius
    for node in _iter_grid(axes):
        dist = float(np.linalg.norm(node - x_check))
        if dist - resolution * np.sqrt(n) >= best:
            continue
        top = float(np.linalg.eigvalsh(eval_bilinear(pencil, node))[-1])
        if top <= kappa * half_diam:  # a feasible point may hide in this cell
            best = min(best, dist)
    return max(0.0, best - resolution * np.sqrt(n))


def _pencil_lipschitz(pencil: MatrixPencil, x_bound: float) -> float:
    """Bound on the gradient of x -> lambda_max(p(x, xx')) over ||x|| <= x_bound."""
    kk = np.sqrt(sum(float(np.linalg.norm(Kk, 2)) ** 2 for Kk in pencil.K))
    ll2 = 0.0
    for (i, j), block in pencil.L.items():
        w = 1.0 if i == j else 2.0
        ll2 += w * float(np.linalg.norm(block, 2)) ** 2
    return kk + 2.0 * x_bound * np.sqrt(ll2)


def _iter_grid(axes):
    from itertools import product

    for combo in product(*axes):
        yield np.array(combo)


def recovery_check(
    problem: BmiProblem,
    kind: _cones.ConeKind,
    x_check: np.ndarray,
    pnorm: PencilNormEstimate | None = None,
    distance: DistanceBracket | None = None,
    settings=None,
) -> RecoveryCheck:
    """Three-way verdict on the recovery threshold: the distance-to-margin
    ratio d/s against the per-cone constant over the pencil norm.

    "verified" requires an exact pencil norm (a lower bound would inflate the
    threshold); "violated" is sound even with a lower-bound norm, since a
    larger true norm only shrinks the threshold further.
    """
    pen = problem.pencil
    x_check = np.asarray(x_check, dtype=float).ravel()
    s_val, _ = g_mfcq_s(pen, x_check, settings=settings)
    if pnorm is None:
        pnorm = pencil_norm(pen, 2)
    if distance is None:
        distance = feasibility_distance(problem, x_check, settings=settings)
    thr = np.inf if pnorm.value == 0.0 else recovery_constant(kind, pen.n) / pnorm.value

    if s_val <= 1e-10:
        verdict = "violated"  # hypothesis unsatisfiable: no decreasing direction
    elif distance.d_upper / s_val <= thr and pnorm.kind == "exact":
        verdict = "verified"
    elif distance.d_lower / s_val > thr:
        verdict = "violated"
    else:
        verdict = "inconclusive"
    return RecoveryCheck(
        d_lower=distance.d_lower,
        d_upper=distance.d_upper,
        s_value=s_val,
        threshold=float(thr),
        verdict=verdict,
    )


def certify(
    problem: BmiProblem,
    kind: _cones.ConeKind,
    solution: _rx.RelaxSolution,
    eta: float,
    x_check: np.ndarray,
    pnorm: PencilNormEstimate | None = None,
    eta_trace: list | None = None,
    include_recovery: bool = True,
    settings=None,
) -> Certificate:
    """Assemble the full certificate for one penalized-relaxation output."""
    pen = problem.pencil
    x_check = np.asarray(x_check, dtype=float).ravel()
    if pnorm is None:
        pnorm = pencil_norm(pen, 2)
    _, gap = exactness(solution.x, solution.X)
    viol = bmi_violation(pen, solution.x)
    stat, compl = kkt_residuals(problem, solution.x, solution.Lambda, eta, x_check)
    margin, sufficient = dual_certificate(problem, kind, solution.Lambda, eta, pnorm)
    ratio = float(np.trace(solution.Lambda)) / eta
    zb = trace_ratio_constant(kind, pen.n) / pnorm.value if pnorm.value > 0 else float("inf")
    obj_scale = 1.0 + abs(float(problem.c @ x_check))
    improved = float(problem.c @ solution.x) <= float(problem.c @ x_check) + 1e-6 * obj_scale
    rec = recovery_check(problem, kind, x_check, pnorm, settings=settings) if include_recovery else None
    return Certificate(
        kind=kind,
        eta=eta,
        exactness_gap=gap,
        bmi_violation=viol,
        kkt_stationarity=stat,
        kkt_compl_slack=compl,
        dual_margin=margin,
        dual_sufficient=sufficient,
        trace_ratio=ratio,
        trace_ratio_limit=float(zb),
        pencil_norm_value=pnorm.value,
        pencil_norm_kind=pnorm.kind,
        objective_improved=improved,
        recovery=rec,
        eta_trace=list(eta_trace or []),
    )


@dataclass
class OvershootPoint:
    eta: float
    gap: float  # ||x - xc|| - d_upper
    status: str


def distance_overshoot(
    problem: BmiProblem,
    x_check: np.ndarray,
    eta_schedule,
    kind: _cones.ConeKind = _cones.ConeKind.SDP,
    settings=None,
) -> list[OvershootPoint]:
    """Distance overshoot ||x(eta) - xc|| - d_upper for each eta in the
    schedule; the theory bounds it by ||c|| / eta once solves are exact."""
    etas = [float(v) for v in eta_schedule]
    if any(b <= a for a, b in zip(etas, etas[1:])):
        raise ValueError("eta schedule must be increasing")
    x_check = np.asarray(x_check, dtype=float).ravel()
    bracket = feasibility_distance(problem, x_check, settings=settings)
    out = []
    for eta in etas:
        program = _rx.build_relaxation(problem, kind, _rx.PenaltyConfig(x_check, eta))
        sol = _rx.solve_relaxation(program, settings)
        if sol.status in ("optimal", "inaccurate"):
            gap = float(np.linalg.norm(sol.x - x_check)) - bracket.d_upper
        else:
            gap = float("nan")
        out.append(OvershootPoint(eta=eta, gap=gap, status=sol.status))
    return out
