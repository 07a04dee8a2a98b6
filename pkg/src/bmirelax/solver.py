"""Bundled first-order conic solver.

Solves   min c'z   s.t.   A z + s = b,   s in K,

where K is an ordered product of zero / nonneg / soc / rsoc / psd blocks
(PSD slacks travel in scaled svec coordinates, so every non-zero block is
self-dual).  The algorithm is ADMM on the homogeneous self-dual embedding:
each iteration solves a cached linear system, projects onto the cone
product, and applies an over-relaxed dual update.  Optimality, primal
infeasibility, and unboundedness are all read off the embedding, the
latter two through Farkas-type certificates.

Desk-scale implementation: the data is densified, a single Cholesky
factorization of I + A'A is cached for the whole solve (the tau row of the
embedding is handled by a rank-one update), and everything is deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from . import cones as _cones
from ._sym import svec_dim, unsvec

_CHECK_EVERY = 25
_RHO_EVERY = 100
_RHO_BAND = (0.1, 10.0)
_TAU_FLOOR = 1e-11


@dataclass
class SolverSettings:
    """Termination and iteration controls."""

    eps_abs: float = 1e-7
    eps_rel: float = 1e-7
    max_iter: int = 200000
    over_relaxation: float = 1.5
    step_rho: float = 1.0

    def __post_init__(self):
        if self.eps_abs <= 0 or self.eps_rel <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be positive")
        if not 0.0 < self.over_relaxation < 2.0:
            raise ValueError("over_relaxation must lie in (0, 2)")
        if self.step_rho <= 0:
            raise ValueError("step_rho must be positive")


@dataclass
class SolverResult:
    """Primal/dual output of one solve.

    For status 'infeasible' the dual vector holds the Farkas certificate
    (A'y ~ 0, <b, y> = -1, y in K*); for 'unbounded' the primal pair holds
    the ray (A z + s ~ 0, s in K, c'z = -1).
    """

    z: np.ndarray
    s: np.ndarray
    y: np.ndarray
    status: str
    iterations: int
    primal_residual: float
    dual_residual: float
    gap: float
    objective: float
    cones: _cones.ConeBlockSpec
    residual_history: list = field(default_factory=list, repr=False)


def dual_extract(result: SolverResult, block) -> np.ndarray:
    """Dual variable of one cone block, reshaped; psd blocks come back as
    symmetrized matrices."""
    if result.status not in ("optimal", "inaccurate", "infeasible"):
        raise ValueError(f"no dual available for status {result.status!r}")
    blk, sl = result.cones.find(block)
    y = result.y[sl]
    if blk.kind == "psd":
        M = unsvec(y)
        return 0.5 * (M + M.T)
    return y.copy()


# ---------------------------------------------------------------------------
# internals


def _project_dual_product(w: np.ndarray, pairs) -> np.ndarray:
    """Project onto K* block by block (dual of zero is free)."""
    out = np.empty_like(w)
    for blk, sl in pairs:
        v = w[sl]
        if blk.kind == "zero":
            out[sl] = v
        elif blk.kind == "nonneg":
            out[sl] = np.maximum(v, 0.0)
        elif blk.kind == "soc":
            out[sl] = _cones.project_soc(v)
        elif blk.kind == "rsoc":
            out[sl] = _cones.project_rsoc(v)
        else:  # psd, self-dual in svec coordinates
            M = unsvec(v)
            lam, V = np.linalg.eigh(0.5 * (M + M.T))
            if lam[0] >= 0.0:
                out[sl] = v
            else:
                P = (V * np.maximum(lam, 0.0)) @ V.T
                out[sl] = _svec_fast(P)
    return out


def _svec_fast(M: np.ndarray) -> np.ndarray:
    iu = np.triu_indices(M.shape[0])
    v = M[iu].copy()
    v[iu[0] != iu[1]] *= np.sqrt(2.0)
    return v


def _ruiz_equilibrate(A: np.ndarray, pairs, iters: int = 15):
    """Block-uniform Ruiz scaling: rows within one cone block share a single
    factor so the scaled slack stays in the same cone."""
    rows, nvar = A.shape
    d = np.ones(rows)
    e = np.ones(nvar)
    Ak = A.copy()
    for _ in range(iters):
        rnorm = np.abs(Ak).max(axis=1)
        dr = np.ones(rows)
        for blk, sl in pairs:
            top = rnorm[sl].max() if sl.stop > sl.start else 0.0
            if top > 0.0:
                dr[sl] = 1.0 / np.sqrt(top)
        cnorm = np.abs(Ak).max(axis=0)
        ec = np.where(cnorm > 0.0, 1.0 / np.sqrt(np.maximum(cnorm, 1e-32)), 1.0)
        d *= dr
        e *= ec
        Ak = Ak * ec[None, :]
        Ak *= dr[:, None]
        if max(abs(1.0 - dr).max(initial=0.0), abs(1.0 - ec).max(initial=0.0)) < 1e-3:
            break
    return Ak, d, e


class _Embedding:
    """Scaled data plus the cached linear algebra for (I + Q)^-1 solves."""

    def __init__(self, As, bs, cs):
        self.A = As
        self.nvar = As.shape[1]
        self.rows = As.shape[0]
        fac = scipy.linalg.cho_factor(np.eye(self.nvar) + As.T @ As, lower=True)
        self.fac = fac
        self.set_bc(bs, cs)

    def set_bc(self, bs, cs):
        self.b = bs
        self.c = cs
        h = np.concatenate([cs, bs])
        g = self._msolve(h[: self.nvar], h[self.nvar :])
        self.h = h
        self.g = g
        self.gamma = 1.0 + float(h @ g)

    def _msolve(self, rz, ry):
        # M = [[I, A'], [-A, I]]; reduce to the cached SPD factorization
        z1 = scipy.linalg.cho_solve(self.fac, rz - self.A.T @ ry)
        z2 = ry + self.A @ z1
        return np.concatenate([z1, z2])

    def solve_lin(self, w):
        p = self._msolve(w[: self.nvar], w[self.nvar : -1])
        tau = (w[-1] + float(self.h @ p)) / self.gamma
        return np.concatenate([p - self.g * tau, [tau]])


def solve(A, b, c, cone_spec: _cones.ConeBlockSpec, settings: SolverSettings | None = None) -> SolverResult:
    """Run the splitting until the residual criteria or a certificate fires."""
    settings = settings or SolverSettings()
    if hasattr(A, "toarray"):
        A = A.toarray()
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float).ravel()
    c = np.asarray(c, dtype=float).ravel()
    rows, nvar = A.shape
    if cone_spec.total_rows != rows or b.size != rows or c.size != nvar:
        raise ValueError(
            f"inconsistent dimensions: A is {A.shape}, |b|={b.size}, |c|={c.size}, "
            f"cone rows={cone_spec.total_rows}"
        )
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b)) and np.all(np.isfinite(c))):
        raise ValueError("solver data must be finite")

    pairs = cone_spec.slices()
    As, d, e = _ruiz_equilibrate(A, pairs)
    bD = d * b
    cE = e * c
    sigma_b = 1.0 / (1.0 + float(np.linalg.norm(bD)))
    sigma_c = 1.0 / (1.0 + float(np.linalg.norm(cE)))
    rho = float(settings.step_rho)

    emb = _Embedding(As, bD * (sigma_b * rho), cE * (sigma_c / rho))
    relax_weight = settings.over_relaxation
    normA = float(np.linalg.norm(A)) if A.size else 0.0

    u = np.zeros(nvar + rows + 1)
    v = np.zeros(nvar + rows + 1)
    u[-1] = 1.0
    v[-1] = 1.0

    def unscale(zbar, ybar, sbar, rho):
        beta_p = sigma_b * rho
        beta_d = sigma_c / rho
        z = e * zbar / beta_p
        y = d * ybar / beta_d
        s = (sbar / d) / beta_p
        return z, y, s

    def residuals(z, y, s):
        Az = A @ z
        ATy = A.T @ y
        pr = float(np.linalg.norm(Az + s - b))
        dr = float(np.linalg.norm(ATy + c))
        pobj = float(c @ z)
        dobj = float(b @ y)
        pden = settings.eps_abs + settings.eps_rel * max(
            np.linalg.norm(Az), np.linalg.norm(s), np.linalg.norm(b)
        )
        dden = settings.eps_abs + settings.eps_rel * max(np.linalg.norm(ATy), np.linalg.norm(c))
        gp = abs(pobj + dobj)
        gden = settings.eps_abs + settings.eps_rel * max(abs(pobj), abs(dobj))
        return pr, dr, gp, pden, dden, gden, pobj

    eps_inf = max(10.0 * settings.eps_abs, 1e-10)
    history: list[tuple[int, float, float, float]] = []
    best = None  # (score, iteration, z, y, s, residual triple, objective)
    status = "inaccurate"
    it = 0
    rho_cooldown = 0

    while True:
        checking = (it % _CHECK_EVERY == 0) or (it >= settings.max_iter)
        if checking:
            if not np.all(np.isfinite(u)) or not np.all(np.isfinite(v)):
                status = "failed"
                break
            tau = u[-1]
            if tau > _TAU_FLOOR:
                z, y, s = unscale(u[:nvar] / tau, u[nvar:-1] / tau, v[nvar:-1] / tau, rho)
                pr, dr, gp, pden, dden, gden, pobj = residuals(z, y, s)
                history.append((it, pr, dr, gp))
                score = max(pr / pden, dr / dden, gp / gden)
                if best is None or score < best[0]:
                    best = (score, it, z, y, s, (pr, dr, gp), pobj)
                if pr <= pden and dr <= dden and gp <= gden:
                    status = "optimal"
                    break

            # Farkas-type certificates from the raw (un-normalized) iterate
            y_raw = d * u[nvar:-1] / (sigma_c / rho)
            bty = float(b @ y_raw)
            ny = float(np.linalg.norm(y_raw))
            if bty < -max(1e-10 * ny * (1.0 + np.linalg.norm(b)), 1e-16):
                ycert = y_raw / (-bty)
                if np.linalg.norm(A.T @ ycert) <= eps_inf * (1.0 + np.linalg.norm(ycert) * normA):
                    z, y, s = (np.zeros(nvar), ycert, np.zeros(rows))
                    status = "infeasible"
                    break
            z_raw = e * u[:nvar] / (sigma_b * rho)
            s_raw = (v[nvar:-1] / d) / (sigma_b * rho)
            ctx = float(c @ z_raw)
            nz = float(np.linalg.norm(z_raw))
            if ctx < -max(1e-10 * nz * (1.0 + np.linalg.norm(c)), 1e-16):
                zcert = z_raw / (-ctx)
                scert = s_raw / (-ctx)
                if np.linalg.norm(A @ zcert + scert) <= eps_inf * (
                    1.0 + (np.linalg.norm(zcert) + np.linalg.norm(scert)) * max(normA, 1.0)
                ):
                    z, y, s = (zcert, np.zeros(rows), scert)
                    status = "unbounded"
                    break

            if it >= settings.max_iter:
                status = "inaccurate"
                break

            # rho adaptation: rebalance the b/c weighting when the residual
            # ratio leaves the band; only the tau-row data refreshes.
            if it > 0 and it % _RHO_EVERY == 0 and rho_cooldown <= 0 and tau > _TAU_FLOOR:
                rp_rel = pr / pden
                rd_rel = dr / dden
                ratio = rp_rel / max(rd_rel, 1e-16)
                if ratio > _RHO_BAND[1] or ratio < _RHO_BAND[0]:
                    factor = float(np.clip(np.sqrt(ratio), 0.1, 10.0))
                    new_rho = float(np.clip(rho * factor, 1e-4, 1e4))
                    f = new_rho / rho
                    if f != 1.0:
                        u[:nvar] *= f
                        v[nvar:-1] *= f
                        u[nvar:-1] /= f
                        rho = new_rho
                        emb.set_bc(bD * (sigma_b * rho), cE * (sigma_c / rho))
                        rho_cooldown = _RHO_EVERY
        rho_cooldown -= _CHECK_EVERY if checking else 0

        ut = emb.solve_lin(u + v)
        ur = relax_weight * ut + (1.0 - relax_weight) * u
        w = ur - v
        unew = np.empty_like(u)
        unew[:nvar] = w[:nvar]
        unew[nvar:-1] = _project_dual_product(w[nvar:-1], pairs)
        unew[-1] = max(w[-1], 0.0)
        v += unew - ur
        u = unew
        it += 1

    if status == "optimal":
        _, _, z, y, s, (pr, dr, gp), pobj = best
    elif status in ("infeasible", "unbounded"):
        pr = dr = gp = float("nan")
        pobj = float("-inf") if status == "unbounded" else float("inf")
    elif best is not None:
        _, _, z, y, s, (pr, dr, gp), pobj = best
    else:
        z, y, s = np.zeros(nvar), np.zeros(rows), np.zeros(rows)
        pr = dr = gp = float("nan")
        pobj = float("nan")
        status = "failed"

    return SolverResult(
        z=z,
        s=s,
        y=y,
        status=status,
        iterations=it,
        primal_residual=pr,
        dual_residual=dr,
        gap=gp,
        objective=pobj,
        cones=cone_spec,
        residual_history=history,
    )
