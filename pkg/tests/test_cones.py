import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bmirelax.cones import (
    ConeBlock,
    ConeBlockSpec,
    ConeKind,
    dual_member,
    member,
    project_psd,
    project_rsoc,
    project_soc,
    socp_dual_margin,
    socp_dual_sufficient_margin,
)

from conftest import sym


def comparison_matrix(G):
    """Independent oracle for the SOCP dual: for symmetric matrices,
    decomposability into 2x2 principal PSD blocks is equivalent to the
    comparison matrix (diagonal kept, off-diagonal replaced by -|.|)
    being PSD, and the max diagonal shift equals its smallest eigenvalue."""
    M = -np.abs(G)
    np.fill_diagonal(M, np.diag(G))
    return M


class TestMember:
    def test_identity_in_all(self):
        for kind in ConeKind:
            assert member(kind, np.eye(3))

    def test_indefinite_outside_all(self):
        H = np.array([[1.0, 2.0], [2.0, 1.0]])  # eigenvalues 3, -1
        for kind in ConeKind:
            assert not member(kind, H)

    def test_rank_one_inclusion_chain(self):
        H = np.ones((2, 2))
        for kind in ConeKind:
            assert member(kind, H)

    def test_asymmetric_rejected(self):
        with pytest.raises(ValueError):
            member(ConeKind.SDP, np.array([[1.0, 1.0], [0.0, 1.0]]))

    def test_sampled_inclusion_chain(self, rng):
        # PSD members lie in all three cones; SOCP members lie in the parabolic cone
        for _ in range(1000):
            n = int(rng.integers(2, 5))
            B = rng.standard_normal((n, n))
            H = B @ B.T
            assert member(ConeKind.SDP, H, 1e-9, scale=(1 + np.linalg.norm(H)) ** 2)
            assert member(ConeKind.SOCP, H, 1e-9, scale=(1 + np.linalg.norm(H)) ** 2)
            assert member(ConeKind.PARABOLIC, H, 1e-7)
            Hs = sym(rng, n)
            if member(ConeKind.SOCP, Hs, 0.0):
                assert member(ConeKind.PARABOLIC, Hs, 1e-12)


class TestDualMember:
    def test_scaled_identity_interior(self):
        for kind in ConeKind:
            inside, margin = dual_member(kind, 2.5 * np.eye(3))
            assert inside
            if kind != ConeKind.SOCP:
                assert margin == pytest.approx(2.5, abs=1e-9)

    def test_parabolic_dual_formula(self):
        _, margin = dual_member(ConeKind.PARABOLIC, np.array([[2.0, -1.0], [-1.0, 2.0]]))
        assert margin == pytest.approx(1.0)

    def test_socp_dual_n2_is_psd(self):
        G = np.array([[1.0, 2.0], [2.0, 5.0]])
        inside, margin = dual_member(ConeKind.SOCP, G)
        assert inside
        assert margin == pytest.approx(np.linalg.eigvalsh(G)[0], abs=1e-6)

    def test_socp_dual_matches_comparison_matrix(self, rng):
        # decomposition margin == lambda_min of the comparison matrix
        for _ in range(12):
            n = int(rng.integers(2, 5))
            G = sym(rng, n, 2.0) + float(rng.uniform(-1, 3)) * np.eye(n)
            margin = socp_dual_margin(G)
            expected = float(np.linalg.eigvalsh(comparison_matrix(G))[0])
            assert margin == pytest.approx(expected, abs=5e-6)

    def test_socp_sufficient_margin_is_conservative(self, rng):
        for _ in range(20):
            n = int(rng.integers(2, 5))
            G = sym(rng, n) + float(rng.uniform(0, 3)) * np.eye(n)
            cheap = socp_dual_sufficient_margin(G)
            if cheap >= 0:
                inside, _ = dual_member(ConeKind.SOCP, G)
                assert inside

    def test_sdp_self_duality(self, rng):
        for _ in range(1000):
            H = sym(rng, 3)
            inside, _ = dual_member(ConeKind.SDP, H, 1e-9)
            assert inside == member(ConeKind.SDP, H, 1e-9)

    def test_dual_pairing_nonnegative(self, rng):
        # <G, H> >= 0 for G in the dual cone and H sampled from the cone itself
        def cone_sample(kind, n):
            H = sym(rng, n)
            t = 0.5
            while not member(kind, H + t * np.eye(n), 0.0, scale=1.0):
                t *= 1.6
            return H + t * np.eye(n)

        for kind in ConeKind:
            hits = 0
            while hits < 60:
                n = 3
                G = sym(rng, n) + float(rng.uniform(0, 4)) * np.eye(n)
                inside, margin = dual_member(kind, G, 0.0)
                if not inside:
                    continue
                H = cone_sample(kind, n)
                assert float(np.sum(G * H)) >= -1e-8 * (1 + np.linalg.norm(G) * np.linalg.norm(H))
                hits += 1


class TestProjections:
    def test_psd_clip(self):
        np.testing.assert_allclose(project_psd(np.diag([3.0, -2.0])), np.diag([3.0, 0.0]))

    def test_psd_idempotent_on_psd(self, rng):
        B = rng.standard_normal((3, 3))
        H = B @ B.T
        np.testing.assert_allclose(project_psd(H), H, atol=1e-12)

    def test_psd_moreau(self, rng):
        for _ in range(50):
            S = sym(rng, 4, 2.0)
            P = project_psd(S)
            N = S - P  # negative part: -project_psd(-S)
            np.testing.assert_allclose(N, -project_psd(-S), atol=1e-9)
            assert abs(np.sum((S - P) * P)) <= 1e-9

    def test_soc_closed_form(self):
        np.testing.assert_allclose(project_soc(np.array([1.0, 0.5])), [1.0, 0.5])
        np.testing.assert_allclose(project_soc(np.array([-1.0, 0.0])), [0.0, 0.0])
        np.testing.assert_allclose(project_soc(np.array([0.0, 2.0])), [1.0, 1.0])

    def test_rsoc_membership_after_projection(self, rng):
        for _ in range(200):
            v = rng.standard_normal(4) * 3
            p = project_rsoc(v)
            assert p[0] >= -1e-12 and p[1] >= -1e-12
            assert 2 * p[0] * p[1] + 1e-9 >= np.linalg.norm(p[2:]) ** 2

    def test_rsoc_interior_fixed(self):
        v = np.array([2.0, 2.0, 1.0])
        np.testing.assert_allclose(project_rsoc(v), v)

    def test_projections_idempotent_and_nonexpansive(self, rng):
        for proj, dim in ((project_soc, 4), (project_rsoc, 5)):
            for _ in range(200):
                a = rng.standard_normal(dim) * 2
                b = rng.standard_normal(dim) * 2
                pa, pb = proj(a), proj(b)
                np.testing.assert_allclose(proj(pa), pa, atol=1e-12)
                assert np.linalg.norm(pa - pb) <= np.linalg.norm(a - b) + 1e-12
        for _ in range(100):
            A, B = sym(rng, 3, 2.0), sym(rng, 3, 2.0)
            PA, PB = project_psd(A), project_psd(B)
            np.testing.assert_allclose(project_psd(PA), PA, atol=1e-11)
            assert np.linalg.norm(PA - PB) <= np.linalg.norm(A - B) + 1e-12


class TestConeBlocks:
    def test_rows(self):
        assert ConeBlock("psd", 3).rows == 6
        assert ConeBlock("soc", 4).rows == 4

    def test_validation(self):
        with pytest.raises(ValueError):
            ConeBlock("rsoc", 2)
        with pytest.raises(ValueError):
            ConeBlock("soc", 1)
        with pytest.raises(ValueError):
            ConeBlock("weird", 3)

    def test_spec_lookup(self):
        spec = ConeBlockSpec((ConeBlock("zero", 2, "eq"), ConeBlock("psd", 2, "Z")))
        blk, sl = spec.find("Z")
        assert blk.kind == "psd" and (sl.start, sl.stop) == (2, 5)
        blk2, _ = spec.find(0)
        assert blk2.label == "eq"
        with pytest.raises(KeyError):
            spec.find("missing")

    @given(st.integers(min_value=2, max_value=6))
    def test_total_rows(self, d):
        spec = ConeBlockSpec((ConeBlock("nonneg", d), ConeBlock("psd", d)))
        assert spec.total_rows == d + d * (d + 1) // 2
