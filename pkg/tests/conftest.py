"""Shared instance generators for the test suite."""

import numpy as np
import pytest
from hypothesis import settings as hyp_settings

from bmirelax.pencil import BmiProblem, MatrixPencil

hyp_settings.register_profile("suite", deadline=None, max_examples=50)
hyp_settings.load_profile("suite")


def sym(rng, m, scale=1.0):
    A = rng.standard_normal((m, m))
    return scale * 0.5 * (A + A.T)


def scalar_problem():
    """min x subject to x^2 - 1 <= 0; optimum x = -1."""
    pencil = MatrixPencil(
        1, 1, np.array([[-1.0]]), (np.array([[0.0]]),), {(0, 0): np.array([[1.0]])}
    )
    return BmiProblem(np.array([1.0]), pencil)


def random_pencil(rng, n, m, k_scale=1.0, l_scale=1.0, density=1.0):
    K = tuple(sym(rng, m, k_scale) for _ in range(n))
    L = {}
    for i in range(n):
        for j in range(i, n):
            if rng.uniform() <= density:
                L[(i, j)] = sym(rng, m, l_scale)
    F0 = sym(rng, m)
    return MatrixPencil(n, m, F0, K, L)


def bounded_feasible_instance(rng, n, m_content, kappa_target=4.0):
    """Random bounded instance, strictly feasible at a known center.

    A content block carries random (K, L) data scaled to a moderate
    Lipschitz constant; a trailing 1x1 block encodes the trace ball
    sum_i X_ii <= 1 + ||x_check||^2, which keeps every relaxation bounded.
    F0 is chosen so that p(x_check, x_check x_check') = -I, making the
    center strictly feasible (the zero direction witnesses MFCQ).

    Returns (problem, x_check).
    """
    m = m_content + 1
    x_check = rng.uniform(-1.0, 1.0, n)

    K_raw = [sym(rng, m_content) for _ in range(n)]
    L_raw = {(i, j): sym(rng, m_content) for i in range(n) for j in range(i, n)}
    x_bound = float(np.linalg.norm(x_check)) + np.sqrt(1.0 + x_check @ x_check) + 1.0
    kk = np.sqrt(sum(np.linalg.norm(Kk, 2) ** 2 for Kk in K_raw))
    ll = np.sqrt(
        sum((1.0 if i == j else 2.0) * np.linalg.norm(B, 2) ** 2 for (i, j), B in L_raw.items())
    )
    kappa_raw = kk + 2.0 * x_bound * ll
    scale = kappa_target / max(kappa_raw, 1e-9)

    K = []
    for k in range(n):
        Kk = np.zeros((m, m))
        Kk[:m_content, :m_content] = scale * K_raw[k]
        K.append(Kk)
    L = {}
    for (i, j), B in L_raw.items():
        blk = np.zeros((m, m))
        blk[:m_content, :m_content] = scale * B
        if i == j:
            blk[m_content, m_content] = 1.0  # trace-ball coordinate
        L[(i, j)] = blk

    M0 = np.eye(m)
    F0 = -M0.copy()
    for k in range(n):
        F0 -= x_check[k] * K[k]
    for (i, j), blk in L.items():
        w = 1.0 if i == j else 2.0
        F0 -= w * x_check[i] * x_check[j] * blk

    pencil = MatrixPencil(n, m, F0, tuple(K), L)
    c = rng.standard_normal(n)
    c /= max(np.linalg.norm(c), 1e-9)
    return BmiProblem(c, pencil), x_check


def scalar_valued_instance(rng, n, q_scale=0.5, g_scale=2.0, boundary_gap=0.01):
    """m = 1 instance (scalar quadratic constraint) with a feasible anchor
    sitting `boundary_gap` inside the boundary.

    Returns (problem, x_feasible).  Useful for recovery-threshold suites:
    the pencil norm is exact for m = 1 and the anchor's gradient is sized
    so small outward steps cross into infeasibility.
    """
    Q = sym(rng, n, 1.0)
    Q *= q_scale / max(np.linalg.norm(Q), 1e-9)
    x_f = rng.uniform(-0.5, 0.5, n)
    g = rng.standard_normal(n)
    g *= g_scale / max(np.linalg.norm(g), 1e-9)
    k_vec = g - 2.0 * Q @ x_f  # gradient of p at x_f equals g
    f0 = -boundary_gap - k_vec @ x_f - x_f @ Q @ x_f
    K = tuple(np.array([[k_vec[i]]]) for i in range(n))
    L = {}
    for i in range(n):
        for j in range(i, n):
            if Q[i, j] != 0.0:
                L[(i, j)] = np.array([[Q[i, j]]])
    pencil = MatrixPencil(n, 1, np.array([[f0]]), K, L)
    c = rng.standard_normal(n)
    c /= max(np.linalg.norm(c), 1e-9)
    return BmiProblem(c, pencil), x_f


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
