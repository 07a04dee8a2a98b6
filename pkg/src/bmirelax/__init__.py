"""Convex relaxations, penalties, and certificates for BMI-constrained problems."""

from .cones import ConeBlock, ConeBlockSpec, ConeKind
from .diagnostics import (
    Certificate,
    DistanceBracket,
    RecoveryCheck,
    certify,
    distance_overshoot,
    dual_certificate,
    exactness,
    feasibility_distance,
    kkt_residuals,
    recovery_check,
)
from .pencil import (
    BmiProblem,
    LiftedPoint,
    MatrixPencil,
    PencilNormEstimate,
    bilinear_adjoint,
    bilinear_derivative,
    bmi_feasible,
    eval_bilinear,
    eval_pencil,
    g_mfcq_s,
    mfcq_check,
    pencil_norm,
)
from .relaxation import (
    ConeProgram,
    EtaSearchResult,
    PenaltyConfig,
    RelaxationError,
    RelaxSolution,
    build_relaxation,
    eta_search,
    lower_bound,
    solve_relaxation,
)
from .sequential import RoundRecord, SequentialSettings, run as sequential_run
from .solver import SolverResult, SolverSettings, dual_extract, solve

__version__ = "0.1.0"

__all__ = [
    "BmiProblem",
    "Certificate",
    "ConeBlock",
    "ConeBlockSpec",
    "ConeKind",
    "ConeProgram",
    "DistanceBracket",
    "EtaSearchResult",
    "LiftedPoint",
    "MatrixPencil",
    "PencilNormEstimate",
    "PenaltyConfig",
    "RecoveryCheck",
    "RelaxSolution",
    "RelaxationError",
    "RoundRecord",
    "SequentialSettings",
    "SolverResult",
    "SolverSettings",
    "bilinear_adjoint",
    "bilinear_derivative",
    "bmi_feasible",
    "build_relaxation",
    "certify",
    "distance_overshoot",
    "dual_certificate",
    "dual_extract",
    "eta_search",
    "eval_bilinear",
    "eval_pencil",
    "exactness",
    "feasibility_distance",
    "g_mfcq_s",
    "kkt_residuals",
    "lower_bound",
    "mfcq_check",
    "pencil_norm",
    "recovery_check",
    "sequential_run",
    "solve",
    "solve_relaxation",
]
