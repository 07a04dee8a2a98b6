import numpy as np
import pytest

from bmirelax._sym import svec, unsvec
from bmirelax.cones import ConeBlock, ConeBlockSpec
from bmirelax.solver import SolverResult, SolverSettings, dual_extract, solve


def generate_feasible(rng, nvar, blocks, bounded=True):
    """Random cone program with strictly feasible primal (and dual when
    bounded): data built from interior points, SCS-style."""
    rows = sum(b.rows for b in blocks)
    A = rng.standard_normal((rows, nvar))

    def interior(block):
        r = block.rows
        if block.kind == "zero":
            return np.zeros(r)
        if block.kind == "nonneg":
            return rng.uniform(0.5, 2.0, r)
        if block.kind == "soc":
            w = rng.standard_normal(r - 1)
            return np.concatenate([[np.linalg.norm(w) + 1.0], w])
        if block.kind == "rsoc":
            tail = rng.standard_normal(r - 2)
            return np.concatenate([[np.linalg.norm(tail) ** 2 / 2 + 1.0, 1.0], tail])
        M = rng.standard_normal((block.size, block.size))
        return svec(M @ M.T + np.eye(block.size))

    s0 = np.concatenate([interior(b) for b in blocks])
    z0 = rng.standard_normal(nvar)
    b_vec = A @ z0 + s0
    if bounded:
        y0 = np.concatenate(
            [np.zeros(b.rows) if b.kind == "zero" else interior(b) for b in blocks]
        )
        c_vec = -A.T @ y0
    else:
        c_vec = rng.standard_normal(nvar)
    return A, b_vec, c_vec


def generate_infeasible(rng, nvar, blocks):
    rows = sum(b.rows for b in blocks)
    A = rng.standard_normal((rows, nvar))
    y0 = np.empty(rows)
    pos = 0
    for b in blocks:
        r = b.rows
        if b.kind == "zero":
            y0[pos : pos + r] = rng.standard_normal(r)
        elif b.kind == "nonneg":
            y0[pos : pos + r] = rng.uniform(0.5, 2.0, r)
        elif b.kind == "soc":
            w = rng.standard_normal(r - 1)
            y0[pos] = np.linalg.norm(w) + 1.0
            y0[pos + 1 : pos + r] = w
        elif b.kind == "rsoc":
            tail = rng.standard_normal(r - 2)
            y0[pos] = np.linalg.norm(tail) ** 2 / 2 + 1.0
            y0[pos + 1] = 1.0
            y0[pos + 2 : pos + r] = tail
        else:
            M = rng.standard_normal((b.size, b.size))
            y0[pos : pos + r] = svec(M @ M.T + np.eye(b.size))
        pos += r
    A -= np.outer(y0, y0 @ A) / (y0 @ y0)  # force A'y0 = 0
    b_vec = -y0 + 0.1 * rng.standard_normal(rows)
    b_vec -= y0 * (y0 @ b_vec + 1.0) / (y0 @ y0)  # force b'y0 = -1
    return A, b_vec, rng.standard_normal(nvar)


def subgradient_probe(A, b, c, spec, z_start, weight, iters=30000):
    """Slow-but-sure check: subgradient descent on the exact penalty
    c'z + weight * dist(b - Az, K).  Returns the best value seen."""
    from bmirelax.cones import project_psd, project_rsoc, project_soc

    def proj_K(w):
        out = np.empty_like(w)
        for blk, sl in spec.slices():
            v = w[sl]
            if blk.kind == "zero":
                out[sl] = 0.0
            elif blk.kind == "nonneg":
                out[sl] = np.maximum(v, 0.0)
            elif blk.kind == "soc":
                out[sl] = project_soc(v)
            elif blk.kind == "rsoc":
                out[sl] = project_rsoc(v)
            else:
                out[sl] = svec(project_psd(unsvec(v)))
        return out

    def fval(z):
        w = b - A @ z
        return float(c @ z) + weight * float(np.linalg.norm(w - proj_K(w)))

    z = z_start.copy()
    best = fval(z)
    for k in range(1, iters + 1):
        w = b - A @ z
        r = w - proj_K(w)
        nr = np.linalg.norm(r)
        g = c - weight * (A.T @ r) / nr if nr > 1e-14 else c.copy()
        ng = np.linalg.norm(g)
        if ng < 1e-14:
            break
        z = z - (0.5 / np.sqrt(k)) * g / ng
        best = min(best, fval(z))
    return best


class TestSanity:
    def test_lp(self):
        A = np.array([[1.0], [-1.0]])
        spec = ConeBlockSpec((ConeBlock("nonneg", 1), ConeBlock("nonneg", 1)))
        res = solve(A, np.array([1.0, 0.0]), np.array([-1.0]), spec)
        assert res.status == "optimal"
        assert res.z[0] == pytest.approx(1.0, abs=1e-6)

    def test_sdp_forced_diagonal(self):
        A = np.zeros((4, 3))
        A[0, 0] = 1.0
        A[1:, :] = -np.eye(3)
        b = np.array([1.0, 0.0, 0.0, 0.0])
        spec = ConeBlockSpec((ConeBlock("zero", 1, "fix"), ConeBlock("psd", 2, "Z")))
        res = solve(A, b, svec(np.eye(2)), spec)
        assert res.status == "optimal"
        assert res.objective == pytest.approx(1.0, abs=1e-6)

    def test_dimension_validation(self):
        spec = ConeBlockSpec((ConeBlock("nonneg", 2),))
        with pytest.raises(ValueError):
            solve(np.zeros((2, 1)), np.zeros(3), np.zeros(1), spec)
        with pytest.raises(ValueError):
            solve(np.full((2, 1), np.nan), np.zeros(2), np.zeros(1), spec)

    def test_settings_validation(self):
        with pytest.raises(ValueError):
            SolverSettings(over_relaxation=2.0)
        with pytest.raises(ValueError):
            SolverSettings(eps_abs=0.0)
        with pytest.raises(ValueError):
            SolverSettings(step_rho=-1.0)


MIXED_CASES = [
    (6, (ConeBlock("zero", 2), ConeBlock("nonneg", 3), ConeBlock("psd", 3))),
    (8, (ConeBlock("soc", 4), ConeBlock("rsoc", 3), ConeBlock("nonneg", 2))),
    (7, (ConeBlock("psd", 3), ConeBlock("soc", 3), ConeBlock("zero", 1))),
    (5, (ConeBlock("psd", 2), ConeBlock("rsoc", 4), ConeBlock("nonneg", 1))),
]


class TestRandomPrograms:
    def test_feasible_against_subgradient_probe(self):
        # the probe searches for anything better than the reported optimum
        rng = np.random.default_rng(42)
        for nvar, blocks in MIXED_CASES[:2]:
            A, b, c = generate_feasible(rng, nvar, blocks)
            spec = ConeBlockSpec(blocks)
            res = solve(A, b, c, spec)
            assert res.status == "optimal"
            weight = 20.0 * (1.0 + np.linalg.norm(res.y))
            best = subgradient_probe(A, b, c, spec, res.z, weight)
            scale = 1.0 + abs(res.objective)
            assert best >= res.objective - 1e-4 * scale

    def test_feasible_against_cvxpy(self):
        cp = pytest.importorskip("cvxpy")
        rng = np.random.default_rng(7)
        for nvar, blocks in MIXED_CASES:
            for _ in range(2):
                A, b, c = generate_feasible(rng, nvar, blocks)
                spec = ConeBlockSpec(blocks)
                res = solve(A, b, c, spec)
                assert res.status == "optimal"
                ref = _cvxpy_reference(cp, A, b, c, blocks)
                assert res.objective == pytest.approx(ref, rel=1e-5, abs=1e-5)

    def test_infeasibility_certificates(self):
        rng = np.random.default_rng(3)
        for nvar, blocks in MIXED_CASES:
            A, b, c = generate_infeasible(rng, nvar, blocks)
            spec = ConeBlockSpec(blocks)
            res = solve(A, b, c, spec)
            assert res.status == "infeasible"
            y = res.y
            scale = 1.0 + np.linalg.norm(y) * (1.0 + np.linalg.norm(A))
            assert np.linalg.norm(A.T @ y) <= 1e-6 * scale
            assert b @ y < 0
            # y in K*: zero-block parts free, the rest self-dual
            for blk, sl in spec.slices():
                v = y[sl]
                if blk.kind == "nonneg":
                    assert np.min(v) >= -1e-6 * scale
                elif blk.kind == "soc":
                    assert v[0] + 1e-6 * scale >= np.linalg.norm(v[1:])
                elif blk.kind == "rsoc":
                    assert 2 * v[0] * v[1] + 1e-6 * scale >= np.linalg.norm(v[2:]) ** 2
                elif blk.kind == "psd":
                    assert np.linalg.eigvalsh(unsvec(v))[0] >= -1e-6 * scale

    def test_unbounded_detection(self):
        rng = np.random.default_rng(11)
        nvar, blocks = 5, (ConeBlock("nonneg", 3), ConeBlock("soc", 3))
        rows = sum(b.rows for b in blocks)
        A = rng.standard_normal((rows, nvar))
        xbar = rng.standard_normal(nvar)
        s_int = np.concatenate(
            [rng.uniform(0.5, 1.5, 3), [2.0], rng.standard_normal(2) * 0.3]
        )
        A -= np.outer(A @ xbar + s_int, xbar) / (xbar @ xbar)  # A xbar = -s_int
        c = -xbar / (xbar @ xbar)  # c'xbar = -1
        zfeas = rng.standard_normal(nvar)
        b = A @ zfeas + s_int
        res = solve(A, b, c, ConeBlockSpec(blocks))
        assert res.status == "unbounded"
        assert c @ res.z == pytest.approx(-1.0, abs=1e-6)
        assert np.linalg.norm(A @ res.z + res.s) <= 1e-5 * (1 + np.linalg.norm(res.z))


def _cvxpy_reference(cp, A, b, c, blocks):
    z = cp.Variable(A.shape[1])
    cons = []
    pos = 0
    for blk in blocks:
        r = blk.rows
        expr = b[pos : pos + r] - A[pos : pos + r] @ z
        if blk.kind == "zero":
            cons.append(expr == 0)
        elif blk.kind == "nonneg":
            cons.append(expr >= 0)
        elif blk.kind == "soc":
            cons.append(cp.SOC(expr[0], expr[1:]))
        elif blk.kind == "rsoc":
            t = (expr[0] + expr[1]) / np.sqrt(2)
            w = cp.hstack([(expr[0] - expr[1]) / np.sqrt(2), expr[2:]])
            cons.append(cp.SOC(t, w))
        else:
            p = blk.size
            iu = np.triu_indices(p)
            cells = [[None] * p for _ in range(p)]
            for k, (i, j) in enumerate(zip(*iu)):
                val = expr[k] / (np.sqrt(2) if i != j else 1.0)
                cells[i][j] = val
                cells[j][i] = val
            cons.append(cp.bmat(cells) >> 0)
        pos += r
    prob = cp.Problem(cp.Minimize(c @ z), cons)
    prob.solve(solver=cp.CLARABEL)
    assert prob.status == "optimal"
    return prob.value


class TestIterationContract:
    def test_returned_point_respects_cones(self):
        # s lands in K exactly (post-projection, up to positive rescaling)
        # and y in K*; zero blocks have free duals
        rng = np.random.default_rng(21)
        nvar, blocks = MIXED_CASES[1]
        A, b, c = generate_feasible(rng, nvar, blocks)
        spec = ConeBlockSpec(blocks)
        res = solve(A, b, c, spec)
        assert res.status == "optimal"
        for blk, sl in spec.slices():
            for vec, skip_zero in ((res.s, False), (res.y, True)):
                v = vec[sl]
                if blk.kind == "zero":
                    if not skip_zero:
                        assert np.max(np.abs(v)) <= 1e-9
                elif blk.kind == "nonneg":
                    assert np.min(v) >= -1e-9
                elif blk.kind == "soc":
                    assert v[0] + 1e-9 >= np.linalg.norm(v[1:])
                elif blk.kind == "rsoc":
                    assert min(v[0], v[1]) >= -1e-9
                    assert 2 * v[0] * v[1] + 1e-9 >= np.linalg.norm(v[2:]) ** 2
                else:
                    assert np.linalg.eigvalsh(unsvec(v))[0] >= -1e-8

    def test_determinism(self):
        rng = np.random.default_rng(5)
        A, b, c = generate_feasible(rng, 6, MIXED_CASES[0][1])
        spec = ConeBlockSpec(MIXED_CASES[0][1])
        r1 = solve(A, b, c, spec)
        r2 = solve(A, b, c, spec)
        assert r1.iterations == r2.iterations
        np.testing.assert_array_equal(r1.z, r2.z)
        np.testing.assert_array_equal(r1.y, r2.y)

    def test_min_so_far_residual_reaches_tolerance(self):
        rng = np.random.default_rng(9)
        A, b, c = generate_feasible(rng, 7, MIXED_CASES[2][1])
        spec = ConeBlockSpec(MIXED_CASES[2][1])
        res = solve(A, b, c, spec)
        assert res.status == "optimal"
        combined = [max(p, d, g) for _, p, d, g in res.residual_history]
        running = np.minimum.accumulate(combined)
        assert all(b2 <= a2 + 1e-15 for a2, b2 in zip(running, running[1:]))

    def test_max_iter_exhaustion_reports_inaccurate(self):
        rng = np.random.default_rng(13)
        A, b, c = generate_feasible(rng, 6, MIXED_CASES[0][1])
        spec = ConeBlockSpec(MIXED_CASES[0][1])
        res = solve(A, b, c, spec, SolverSettings(eps_abs=1e-14, eps_rel=1e-14, max_iter=50))
        assert res.status == "inaccurate"
        assert np.isfinite(res.primal_residual)


class TestDualExtraction:
    def _scalar_sdp(self):
        # min x s.t. x^2 - 1 <= 0 encoded by hand: vars (x, X)
        A = np.array(
            [
                [0.0, 1.0],  # lmi slack 1 - X in psd(1)
                [0.0, 0.0],  # lift block [[1, x], [x, X]] rows
                [-np.sqrt(2), 0.0],
                [0.0, -1.0],
            ]
        )
        b = np.array([1.0, 1.0, 0.0, 0.0])
        c = np.array([1.0, 0.0])
        spec = ConeBlockSpec((ConeBlock("psd", 1, "lmi"), ConeBlock("psd", 2, "lift")))
        return A, b, c, spec

    def test_lmi_dual_complementary_slackness(self):
        A, b, c, spec = self._scalar_sdp()
        res = solve(A, b, c, spec)
        assert res.status == "optimal"
        lam = dual_extract(res, "lmi")
        slack = 1.0 - res.z[1]  # p(x, X) = X - 1 <= 0
        assert lam[0, 0] * slack == pytest.approx(0.0, abs=1e-6)
        assert lam[0, 0] >= -1e-9

    def test_inactive_constraint_zero_dual(self):
        # min z s.t. z >= 0, z <= 5: upper bound inactive at optimum
        A = np.array([[-1.0], [1.0]])
        b = np.array([0.0, 5.0])
        spec = ConeBlockSpec((ConeBlock("nonneg", 1, "lb"), ConeBlock("nonneg", 1, "ub")))
        res = solve(A, b, np.array([1.0]), spec)
        assert res.status == "optimal"
        assert dual_extract(res, "ub")[0] == pytest.approx(0.0, abs=1e-7)

    def test_psd_dual_is_psd(self):
        rng = np.random.default_rng(17)
        blocks = (ConeBlock("psd", 3, "S"), ConeBlock("nonneg", 2, "pos"))
        A, b, c = generate_feasible(rng, 6, blocks)
        res = solve(A, b, c, ConeBlockSpec(blocks))
        assert res.status == "optimal"
        lam = dual_extract(res, "S")
        assert np.linalg.eigvalsh(lam)[0] >= -1e-6

    def test_unknown_block(self):
        A, b, c, spec = self._scalar_sdp()
        res = solve(A, b, c, spec)
        with pytest.raises(KeyError):
            dual_extract(res, "nope")
