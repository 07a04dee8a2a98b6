"""Minimal sequential driver: re-center the penalty at each exact solve.

Each round solves the penalized relaxation at the current (x_check, eta).
An exact round keeps eta and moves the center to the solution; an inexact
round doubles eta.  The weight never decreases (the recovery theory needs
it large, and shrinking it re-opens inexactness).  The loop stops when the
feasible objective stalls or the round budget runs out.

This is deliberately plain plumbing; tuned schedules are out of scope and
the doubling-on-inexact rule is a placeholder documented as such.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import relaxation as _rx
from .cones import ConeKind
from .pencil import BmiProblem, bmi_feasible


@dataclass
class SequentialSettings:
    kind: ConeKind = ConeKind.SDP
    max_rounds: int = 30
    eta0: float | None = None
    eta_growth: float = 2.0
    obj_stall_tol: float = 1e-6
    gap_rtol: float = 1e-6

    def __post_init__(self):
        if self.max_rounds < 1:
            raise ValueError("max_rounds must be >= 1")
        if self.eta0 is not None and self.eta0 <= 0:
            raise ValueError("eta0 must be positive")
        if self.eta_growth <= 1.0:
            raise ValueError("eta_growth must exceed 1")
        if self.obj_stall_tol <= 0 or self.gap_rtol <= 0:
            raise ValueError("tolerances must be positive")


@dataclass
class RoundRecord:
    round: int
    eta: float
    objective: float
    exactness_gap: float
    feasible: bool
    status: str
    x: np.ndarray = field(repr=False, default=None)


class SequentialFailure(RuntimeError):
    """Every round failed to solve; the trace so far is attached."""

    def __init__(self, message, trace):
        super().__init__(message)
        self.trace = trace


def run(problem: BmiProblem, x0, settings: SequentialSettings | None = None) -> list[RoundRecord]:
    """Iterate penalized solves from x0; returns the per-round trace."""
    settings = settings or SequentialSettings()
    x_check = np.asarray(x0, dtype=float).ravel()
    if x_check.size != problem.pencil.n:
        raise ValueError("x0 dimension mismatch")
    if not np.all(np.isfinite(x_check)):
        raise ValueError("x0 must be finite")

    eta = settings.eta0 if settings.eta0 is not None else max(1.0, float(np.linalg.norm(problem.c)))
    trace: list[RoundRecord] = []
    best_obj = np.inf
    any_solved = False

    for rnd in range(1, settings.max_rounds + 1):
        program = _rx.build_relaxation(problem, settings.kind, _rx.PenaltyConfig(x_check, eta))
        sol = _rx.solve_relaxation(program)
        cx = float(problem.c @ sol.x)
        if sol.status != "failed":
            any_solved = True
        if sol.status in ("optimal", "inaccurate"):
            gap = _rx.exactness_gap(sol.x, sol.X)
            exact = sol.status == "optimal" and gap <= settings.gap_rtol * (
                1.0 + float(np.linalg.norm(sol.X))
            )
            feasible = bmi_feasible(problem.pencil, sol.x, 1e-6)
        else:
            gap = float("inf")
            exact = feasible = False
        trace.append(
            RoundRecord(
                round=rnd,
                eta=eta,
                objective=cx,
                exactness_gap=gap,
                feasible=feasible,
                status=sol.status,
                x=sol.x,
            )
        )
        if sol.status == "infeasible":
            continue  # surfaced in the trace; eta changes nothing, but finish the budget politely
        if exact:
            if feasible and cx >= best_obj - settings.obj_stall_tol * (1.0 + abs(best_obj)):
                if np.isfinite(best_obj):
                    break  # stalled
            if feasible:
                best_obj = min(best_obj, cx)
            x_check = sol.x
        else:
            eta *= settings.eta_growth
    if not any_solved:
        raise SequentialFailure("every round failed to solve", trace)
    return trace
