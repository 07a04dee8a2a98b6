"""Problem/report file formats and the command-line front end.

The problem format is JSON: dimensions, the cost vector, dense row-major
matrices for the constant and linear blocks, and a sparse-by-pair list for
the bilinear blocks (1-based indices, i <= j).  Reports are JSON too, with
every number serialized to 17 significant digits so round-trips are
lossless and repeated runs are byte-identical.  Timing is opt-in for the
same reason.

Exit codes: 0 optimal/verified, 2 infeasible/violated, 3 inconclusive or
inaccurate, 1 usage or data errors.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from . import diagnostics as _dg
from . import oracle as _oc
from . import relaxation as _rx
from . import sequential as _sq
from . import solver as _solver
from .cones import ConeBlock, ConeBlockSpec, ConeKind
from .pencil import BmiProblem, MatrixPencil, pencil_norm

SCHEMA_VERSION = "1"

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NEGATIVE = 2
EXIT_INCONCLUSIVE = 3


class ProblemFormatError(ValueError):
    """Malformed problem or solution file; message names the offending field."""


# ---------------------------------------------------------------------------
# deterministic JSON emission (17 significant digits)


def _fmt_scalar(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    v = float(x)
    if np.isnan(v):
        return "NaN"
    if np.isinf(v):
        return "Infinity" if v > 0 else "-Infinity"
    return format(v, ".17g")


def _is_scalar(x) -> bool:
    return x is None or isinstance(x, (bool, np.bool_, int, np.integer, float, np.floating, str))


def _emit(obj, indent: int = 0) -> str:
    pad = "  " * indent
    if obj is None:
        return "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    if _is_scalar(obj):
        return _fmt_scalar(obj)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, (list, tuple)):
        items = list(obj)
        if all(_is_scalar(v) and not isinstance(v, str) for v in items):
            return "[" + ", ".join(_emit(v) for v in items) + "]"
        inner = ",\n".join(pad + "  " + _emit(v, indent + 1) for v in items)
        return "[\n" + inner + "\n" + pad + "]"
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        inner = ",\n".join(
            f"{pad}  {json.dumps(str(k))}: {_emit(v, indent + 1)}" for k, v in obj.items()
        )
        return "{\n" + inner + "\n" + pad + "}"
    raise TypeError(f"cannot serialize {type(obj)!r}")


def emit_json(obj) -> str:
    return _emit(obj) + "\n"


# ---------------------------------------------------------------------------
# problem files


_PROBLEM_FIELDS = {"schema_version", "n", "m", "c", "F0", "K", "L", "x_check", "labels"}


def _matrix(data, m: int, name: str) -> np.ndarray:
    try:
        M = np.array(data, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ProblemFormatError(f"{name}: not a numeric matrix") from exc
    if M.shape != (m, m):
        raise ProblemFormatError(f"{name}: expected a {m}x{m} matrix, got shape {M.shape}")
    return M


def parse_problem(text, strict: bool = False):
    """Parse and validate a problem file.

    Returns (problem, x_check_or_None, labels, warnings).
    """
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProblemFormatError(f"malformed JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ProblemFormatError("top level must be an object")

    warnings = []
    unknown = sorted(set(data) - _PROBLEM_FIELDS)
    if unknown:
        if strict:
            raise ProblemFormatError(f"unknown fields {unknown} (strict mode)")
        warnings.append(f"ignoring unknown fields {unknown}")

    if data.get("schema_version") != SCHEMA_VERSION:
        raise ProblemFormatError(
            f"schema_version: expected {SCHEMA_VERSION!r}, got {data.get('schema_version')!r}"
        )
    for key in ("n", "m", "c", "F0", "K", "L"):
        if key not in data:
            raise ProblemFormatError(f"missing required field {key!r}")
    n, m = data["n"], data["m"]
    if not isinstance(n, int) or not isinstance(m, int) or n < 1 or m < 1:
        raise ProblemFormatError("n and m must be positive integers")

    c = np.asarray(data["c"], dtype=float).ravel()
    if c.size != n:
        raise ProblemFormatError(f"c: expected {n} entries, got {c.size}")
    F0 = _matrix(data["F0"], m, "F0")
    if not isinstance(data["K"], list) or len(data["K"]) != n:
        raise ProblemFormatError(f"K: expected a list of {n} matrices")
    K = tuple(_matrix(Kk, m, f"K[{k}]") for k, Kk in enumerate(data["K"]))

    L = {}
    if not isinstance(data["L"], list):
        raise ProblemFormatError("L: expected a list of {i, j, matrix} entries")
    for idx, row in enumerate(data["L"]):
        if not isinstance(row, dict) or not {"i", "j", "matrix"} <= set(row):
            raise ProblemFormatError(f"L[{idx}]: each entry needs fields i, j, matrix")
        i, j = row["i"], row["j"]
        if not isinstance(i, int) or not isinstance(j, int) or not 1 <= i <= j <= n:
            raise ProblemFormatError(
                f"L[{idx}]: indices must be integers with 1 <= i <= j <= n, got ({i}, {j})"
            )
        pair = (i - 1, j - 1)
        if pair in L:
            raise ProblemFormatError(f"L[{idx}]: duplicate pair ({i}, {j})")
        L[pair] = _matrix(row["matrix"], m, f"L[{idx}].matrix")

    try:
        pencil = MatrixPencil(n, m, F0, K, L)
        problem = BmiProblem(c, pencil)
    except (ValueError, IndexError) as exc:
        raise ProblemFormatError(str(exc)) from exc

    x_check = None
    if data.get("x_check") is not None:
        x_check = np.asarray(data["x_check"], dtype=float).ravel()
        if x_check.size != n:
            raise ProblemFormatError(f"x_check: expected {n} entries, got {x_check.size}")
    labels = data.get("labels") or {}
    if not isinstance(labels, dict):
        raise ProblemFormatError("labels: expected an object")
    return problem, x_check, labels, warnings


def emit_problem(problem: BmiProblem, x_check=None, labels=None) -> str:
    pen = problem.pencil
    doc = {
        "schema_version": SCHEMA_VERSION,
        "n": pen.n,
        "m": pen.m,
        "c": problem.c,
        "F0": pen.F0,
        "K": [pen.K[k] for k in range(pen.n)],
        "L": [
            {"i": i + 1, "j": j + 1, "matrix": block} for (i, j), block in sorted(pen.L.items())
        ],
    }
    if x_check is not None:
        doc["x_check"] = np.asarray(x_check, dtype=float).ravel()
    if labels:
        doc["labels"] = dict(sorted(labels.items()))
    return emit_json(doc)


# ---------------------------------------------------------------------------
# solution files (input of `certify`)

_SOLUTION_FIELDS = {"schema_version", "cone", "eta", "x_check", "x", "X", "Lambda"}


def parse_solution(text, n: int, m: int, strict: bool = False):
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProblemFormatError(f"malformed JSON: {exc}") from exc
    unknown = sorted(set(data) - _SOLUTION_FIELDS)
    if unknown and strict:
        raise ProblemFormatError(f"unknown fields {unknown} (strict mode)")
    for key in ("cone", "eta", "x_check", "x", "X"):
        if key not in data:
            raise ProblemFormatError(f"solution file: missing field {key!r}")
    kind = _cone_from_name(data["cone"])
    eta = float(data["eta"])
    if eta <= 0:
        raise ProblemFormatError("solution file: eta must be positive")
    x = np.asarray(data["x"], dtype=float).ravel()
    x_check = np.asarray(data["x_check"], dtype=float).ravel()
    if x.size != n or x_check.size != n:
        raise ProblemFormatError("solution file: x / x_check dimension mismatch")
    X = np.array(data["X"], dtype=float)
    if X.shape != (n, n):
        raise ProblemFormatError("solution file: X dimension mismatch")
    if data.get("Lambda") is not None:
        Lam = np.array(data["Lambda"], dtype=float)
        if Lam.shape != (m, m):
            raise ProblemFormatError("solution file: Lambda dimension mismatch")
    else:
        Lam = np.zeros((m, m))
    return kind, eta, x_check, x, X, Lam


# ---------------------------------------------------------------------------
# standard-form dump (external-solver A/B tests)


def write_standard_form(program: _rx.ConeProgram) -> str:
    """Plain-text dump: dimensions, cone lines, then b/c/A nonzeros as triplets."""
    A = program.A.tocoo()
    lines = [f"dims {program.A.shape[0]} {program.num_vars}"]
    for blk in program.cone_spec.blocks:
        lines.append(f"cone {blk.kind} {blk.size} {blk.label}")
    for i, v in enumerate(program.cost):
        if v != 0.0:
            lines.append(f"c {i} {format(float(v), '.17g')}")
    for i, v in enumerate(program.rhs):
        if v != 0.0:
            lines.append(f"b {i} {format(float(v), '.17g')}")
    order = np.lexsort((A.col, A.row))
    for k in order:
        lines.append(f"A {A.row[k]} {A.col[k]} {format(float(A.data[k]), '.17g')}")
    return "\n".join(lines) + "\n"


def read_standard_form(text: str):
    """Inverse of write_standard_form: returns (A, b, c, cone_spec)."""
    rows = nvar = None
    blocks, centries, bentries, aentries = [], [], [], []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        tag = parts[0]
        if tag == "dims":
            rows, nvar = int(parts[1]), int(parts[2])
        elif tag == "cone":
            label = parts[3] if len(parts) > 3 else ""
            blocks.append(ConeBlock(parts[1], int(parts[2]), label))
        elif tag == "c":
            centries.append((int(parts[1]), float(parts[2])))
        elif tag == "b":
            bentries.append((int(parts[1]), float(parts[2])))
        elif tag == "A":
            aentries.append((int(parts[1]), int(parts[2]), float(parts[3])))
        else:
            raise ProblemFormatError(f"standard-form line {lineno}: unknown tag {tag!r}")
    if rows is None:
        raise ProblemFormatError("standard-form dump misses the dims line")
    A = np.zeros((rows, nvar))
    for i, j, v in aentries:
        A[i, j] = v
    b = np.zeros(rows)
    for i, v in bentries:
        b[i] = v
    c = np.zeros(nvar)
    for i, v in centries:
        c[i] = v
    return A, b, c, ConeBlockSpec(tuple(blocks))


# ---------------------------------------------------------------------------
# report assembly


def _cone_from_name(name: str) -> ConeKind:
    for kind in ConeKind:
        if kind.value == name:
            return kind
    raise ProblemFormatError(f"unknown cone {name!r} (expected sdp|socp|parabolic)")


def _settings_dict(settings: _solver.SolverSettings) -> dict:
    return {
        "eps_abs": settings.eps_abs,
        "eps_rel": settings.eps_rel,
        "max_iter": settings.max_iter,
        "over_relaxation": settings.over_relaxation,
        "step_rho": settings.step_rho,
    }


def _solution_dict(sol: _rx.RelaxSolution, eta=None) -> dict:
    doc = {
        "status": sol.status,
        "objective": sol.objective,
        "x": sol.x,
        "X": sol.X,
        "Lambda": sol.Lambda,
        "residuals": {
            "primal": sol.primal_residual,
            "dual": sol.dual_residual,
            "gap": sol.gap_residual,
        },
        "iterations": sol.iterations,
    }
    if eta is not None:
        doc["eta"] = eta
    return doc


def _certificate_dict(cert: _dg.Certificate) -> dict:
    doc = {
        "cone": cert.kind.value,
        "eta": cert.eta,
        "exactness_gap": cert.exactness_gap,
        "bmi_violation": cert.bmi_violation,
        "kkt_stationarity": cert.kkt_stationarity,
        "kkt_compl_slack": cert.kkt_compl_slack,
        "dual_margin": cert.dual_margin,
        "dual_sufficient": cert.dual_sufficient,
        "trace_ratio": cert.trace_ratio,
        "trace_ratio_limit": cert.trace_ratio_limit,
        "pencil_norm_value": cert.pencil_norm_value,
        "pencil_norm_kind": cert.pencil_norm_kind,
        "objective_improved": cert.objective_improved,
        "eta_trace": [
            {"eta": e, "exactness_gap": g, "status": s} for (e, g, s) in cert.eta_trace
        ],
    }
    if cert.recovery is not None:
        doc["recovery"] = {
            "d_lower": cert.recovery.d_lower,
            "d_upper": cert.recovery.d_upper,
            "s_value": cert.recovery.s_value,
            "threshold": cert.recovery.threshold,
            "verdict": cert.recovery.verdict,
        }
    return doc


def _write_report(doc: dict, out_path) -> None:
    text = emit_json(doc)
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# CLI


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


class _UsageError(Exception):
    pass


def _vector_arg(text: str, n: int, what: str) -> np.ndarray:
    try:
        vec = np.array([float(tok) for tok in text.split(",")])
    except ValueError as exc:
        raise _UsageError(f"{what}: expected comma-separated numbers") from exc
    if vec.size != n:
        raise _UsageError(f"{what}: expected {n} entries, got {vec.size}")
    return vec


def _build_parser() -> _Parser:
    parser = _Parser(prog="bmirelax", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, cone=True):
        p.add_argument("problem", help="problem file (JSON)")
        if cone:
            p.add_argument("--cone", choices=[k.value for k in ConeKind], default="sdp")
        p.add_argument("--eps", type=float, default=1e-7, help="solver tolerance")
        p.add_argument("--max-iter", type=int, default=200000)
        p.add_argument("--seed", type=int, default=0, help="seed for estimator restarts")
        p.add_argument("--strict", action="store_true", help="reject unknown file fields")
        p.add_argument("--out", default=None, help="report path (default: stdout)")
        p.add_argument("--timing", action="store_true", help="include wall times in the report")

    p_relax = sub.add_parser("relax", help="solve one relaxation")
    common(p_relax)
    p_relax.add_argument("--penalty", action="store_true", help="add the penalty term")
    p_relax.add_argument("--eta", type=float, default=None, help="penalty weight")
    p_relax.add_argument("--x-check", default=None, help="penalty center, comma-separated")
    p_relax.add_argument("--dump-standard-form", default=None, help="write the A/b/c/cone dump")

    p_solve = sub.add_parser("solve", help="penalty-weight search to exactness")
    common(p_solve)
    p_solve.add_argument("--x-check", default=None)
    p_solve.add_argument("--eta0", type=float, default=None)
    p_solve.add_argument("--max-doublings", type=int, default=20)
    p_solve.add_argument("--no-recovery", action="store_true", help="skip the distance bracket")

    p_seq = sub.add_parser("sequential", help="iterated penalized relaxations")
    common(p_seq)
    p_seq.add_argument("--x0", default=None, help="starting point, comma-separated")
    p_seq.add_argument("--max-rounds", type=int, default=30)
    p_seq.add_argument("--eta0", type=float, default=None)
    p_seq.add_argument("--eta-growth", type=float, default=2.0)

    p_cert = sub.add_parser("certify", help="certificate for a solution file")
    common(p_cert, cone=False)
    p_cert.add_argument("--solution", required=True, help="solution file (JSON)")
    p_cert.add_argument("--no-recovery", action="store_true")

    p_orc = sub.add_parser("oracle", help="grid/sphere brute-force tools")
    common(p_orc, cone=False)
    p_orc.add_argument(
        "--mode", choices=["feasible-set", "optimum", "sphere-norm"], required=True
    )
    p_orc.add_argument("--box", default=None, help="lo,hi shared by all coordinates")
    p_orc.add_argument("--resolution", type=float, default=0.1)
    p_orc.add_argument("--q", type=int, choices=[1, 2], default=2)

    p_bounds = sub.add_parser("bounds", help="lower bounds from all three relaxations")
    common(p_bounds, cone=False)
    return parser


def _load_problem(args):
    with open(args.problem, "r", encoding="utf-8") as fh:
        text = fh.read()
    problem, x_check, labels, warnings = parse_problem(text, strict=args.strict)
    for w in warnings:
        print(f"warning: {w}", file=sys.stderr)
    return problem, x_check, labels


def _solver_settings(args) -> _solver.SolverSettings:
    return _solver.SolverSettings(eps_abs=args.eps, eps_rel=args.eps, max_iter=args.max_iter)


def _status_exit(status: str) -> int:
    if status == "optimal":
        return EXIT_OK
    if status in ("infeasible", "unbounded"):
        return EXIT_NEGATIVE
    return EXIT_INCONCLUSIVE


def _cmd_relax(args) -> int:
    problem, x_check_file, _ = _load_problem(args)
    kind = _cone_from_name(args.cone)
    settings = _solver_settings(args)
    penalty = None
    eta = None
    if args.penalty:
        center = (
            _vector_arg(args.x_check, problem.pencil.n, "--x-check")
            if args.x_check
            else x_check_file
        )
        if center is None:
            raise _UsageError("--penalty requires --x-check or an x_check field in the file")
        eta = args.eta if args.eta is not None else max(1.0, float(np.linalg.norm(problem.c)))
        penalty = _rx.PenaltyConfig(center, eta)
    t0 = time.monotonic()
    program = _rx.build_relaxation(problem, kind, penalty)
    if args.dump_standard_form:
        with open(args.dump_standard_form, "w", encoding="utf-8") as fh:
            fh.write(write_standard_form(program))
    sol = _rx.solve_relaxation(program, settings)
    elapsed = time.monotonic() - t0
    doc = {
        "schema_version": SCHEMA_VERSION,
        "command": "relax",
        "solver_settings": _settings_dict(settings),
        "results": [{"cone": kind.value, **_solution_dict(sol, eta)}],
    }
    if penalty is not None and sol.status in ("optimal", "inaccurate"):
        cert = _dg.certify(
            problem,
            kind,
            sol,
            eta,
            penalty.x_check,
            pnorm=pencil_norm(problem.pencil, 2, seed=args.seed),
            include_recovery=False,
        )
        doc["results"][0]["certificate"] = _certificate_dict(cert)
    if args.timing:
        doc["timing"] = {"seconds": elapsed}
    _write_report(doc, args.out)
    return _status_exit(sol.status)


def _cmd_solve(args) -> int:
    problem, x_check_file, _ = _load_problem(args)
    kind = _cone_from_name(args.cone)
    settings = _solver_settings(args)
    center = (
        _vector_arg(args.x_check, problem.pencil.n, "--x-check")
        if args.x_check
        else x_check_file
    )
    if center is None:
        raise _UsageError("solve requires --x-check or an x_check field in the file")
    t0 = time.monotonic()
    search = _rx.eta_search(
        problem,
        kind,
        center,
        eta0=args.eta0,
        max_doublings=args.max_doublings,
        settings=settings,
    )
    elapsed = time.monotonic() - t0
    doc = {
        "schema_version": SCHEMA_VERSION,
        "command": "solve",
        "solver_settings": _settings_dict(settings),
        "results": [],
    }
    exit_code = EXIT_INCONCLUSIVE
    if search.solution is not None:
        entry = {"cone": kind.value, **_solution_dict(search.solution, search.eta)}
        if search.solution.status in ("optimal", "inaccurate"):
            cert = _dg.certify(
                problem,
                kind,
                search.solution,
                search.eta,
                center,
                pnorm=pencil_norm(problem.pencil, 2, seed=args.seed),
                eta_trace=search.trace,
                include_recovery=not args.no_recovery,
                settings=settings,
            )
            entry["certificate"] = _certificate_dict(cert)
        doc["results"].append(entry)
        if search.solution.status == "infeasible":
            exit_code = EXIT_NEGATIVE
        elif search.exact:
            exit_code = EXIT_OK
    if args.timing:
        doc["timing"] = {"seconds": elapsed}
    _write_report(doc, args.out)
    return exit_code


def _cmd_sequential(args) -> int:
    problem, x_check_file, _ = _load_problem(args)
    kind = _cone_from_name(args.cone)
    x0 = (
        _vector_arg(args.x0, problem.pencil.n, "--x0")
        if args.x0
        else (x_check_file if x_check_file is not None else np.zeros(problem.pencil.n))
    )
    settings = _sq.SequentialSettings(
        kind=kind, max_rounds=args.max_rounds, eta0=args.eta0, eta_growth=args.eta_growth
    )
    t0 = time.monotonic()
    try:
        trace = _sq.run(problem, x0, settings)
    except _sq.SequentialFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INCONCLUSIVE
    elapsed = time.monotonic() - t0
    rows = [
        {
            "round": r.round,
            "eta": r.eta,
            "objective": r.objective,
            "exactness_gap": r.exactness_gap,
            "feasible": r.feasible,
            "status": r.status,
            "x": r.x,
        }
        for r in trace
    ]
    doc = {
        "schema_version": SCHEMA_VERSION,
        "command": "sequential",
        "cone": kind.value,
        "sequential_trace": rows,
    }
    if args.timing:
        doc["timing"] = {"seconds": elapsed}
    _write_report(doc, args.out)
    feasible_rounds = [r for r in trace if r.feasible]
    if feasible_rounds:
        return EXIT_OK
    if all(r.status == "infeasible" for r in trace):
        return EXIT_NEGATIVE
    return EXIT_INCONCLUSIVE


def _cmd_certify(args) -> int:
    problem, _, _ = _load_problem(args)
    pen = problem.pencil
    with open(args.solution, "r", encoding="utf-8") as fh:
        sol_text = fh.read()
    kind, eta, x_check, x, X, Lam = parse_solution(sol_text, pen.n, pen.m, strict=args.strict)
    sol = _rx.RelaxSolution(
        x=x,
        X=X,
        Lambda=Lam,
        objective=float(problem.c @ x),
        status="optimal",
        primal_residual=0.0,
        dual_residual=0.0,
        gap_residual=0.0,
        iterations=0,
    )
    cert = _dg.certify(
        problem,
        kind,
        sol,
        eta,
        x_check,
        pnorm=pencil_norm(pen, 2, seed=args.seed),
        include_recovery=not args.no_recovery,
    )
    doc = {
        "schema_version": SCHEMA_VERSION,
        "command": "certify",
        "certificate": _certificate_dict(cert),
    }
    _write_report(doc, args.out)
    # the exit code grades the solution itself; the recovery verdict concerns
    # the initial point's a-priori guarantee and stays informational here
    scale = 1.0 + float(np.linalg.norm(X))
    if cert.bmi_violation > 1e-6 * scale:
        return EXIT_NEGATIVE
    if cert.exactness_gap <= 1e-5 * scale:
        return EXIT_OK
    return EXIT_INCONCLUSIVE


def _cmd_oracle(args) -> int:
    problem, x_check_file, _ = _load_problem(args)
    pen = problem.pencil
    if args.mode == "sphere-norm":
        bracket = _oc.sphere_pencil_norm(pen, args.q, args.resolution)
        doc = {
            "schema_version": SCHEMA_VERSION,
            "command": "oracle",
            "mode": args.mode,
            "q": args.q,
            "lower": bracket.lower,
            "upper": bracket.upper,
            "witness_u": bracket.witness_u,
        }
        _write_report(doc, args.out)
        return EXIT_OK
    if args.box is None:
        raise _UsageError("oracle grid modes require --box lo,hi")
    lo, hi = (float(t) for t in args.box.split(","))
    box = (np.full(pen.n, lo), np.full(pen.n, hi))
    if args.mode == "feasible-set":
        pts = _oc.grid_feasible_set(problem, box, args.resolution)
        doc = {
            "schema_version": SCHEMA_VERSION,
            "command": "oracle",
            "mode": args.mode,
            "count": len(pts),
            "points": [p for p in pts],
        }
        _write_report(doc, args.out)
        return EXIT_OK if pts else EXIT_NEGATIVE
    x_best, val = _oc.grid_optimum(problem, box, args.resolution)
    doc = {
        "schema_version": SCHEMA_VERSION,
        "command": "oracle",
        "mode": args.mode,
        "x": x_best,
        "value": val,
    }
    _write_report(doc, args.out)
    return EXIT_OK if x_best is not None else EXIT_NEGATIVE


def _cmd_bounds(args) -> int:
    problem, _, _ = _load_problem(args)
    settings = _solver_settings(args)
    t0 = time.monotonic()
    results = []
    statuses = []
    for kind in ConeKind:
        sol = _rx.solve_relaxation(_rx.build_relaxation(problem, kind), settings)
        statuses.append(sol.status)
        results.append(
            {
                "cone": kind.value,
                "status": sol.status,
                "lower_bound": sol.objective if sol.status == "optimal" else None,
            }
        )
    elapsed = time.monotonic() - t0
    doc = {
        "schema_version": SCHEMA_VERSION,
        "command": "bounds",
        "solver_settings": _settings_dict(settings),
        "results": results,
    }
    if args.timing:
        doc["timing"] = {"seconds": elapsed}
    _write_report(doc, args.out)
    if any(s in ("infeasible", "unbounded") for s in statuses):
        return EXIT_NEGATIVE
    if any(s != "optimal" for s in statuses):
        return EXIT_INCONCLUSIVE
    return EXIT_OK


_COMMANDS = {
    "relax": _cmd_relax,
    "solve": _cmd_solve,
    "sequential": _cmd_sequential,
    "certify": _cmd_certify,
    "oracle": _cmd_oracle,
    "bounds": _cmd_bounds,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ProblemFormatError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
