import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_hermitian, random_pd
from qnr_enclose import linalg
from qnr_enclose.constants import (
    INF,
    DampingConstants,
    compute_constants,
    mu_bounds,
    mu_objective,
    pipe_constants,
    stiffness_bound_margin,
)
from qnr_enclose.errors import InvalidParameter
from qnr_enclose.model import build_diag_example, build_pipe, make_model

PI = math.pi


def random_model(rng, n, skew=0.5):
    return make_model(random_pd(rng, n, 0.5), random_pd(rng, n, 0.2) + 1j * skew * random_hermitian(rng, n))


class TestDampingConstants:
    def test_rejects_negative(self):
        with pytest.raises(InvalidParameter):
            DampingConstants(-1.0, 1.0, 1.0, 1.0, 1.0, 0.0)

    def test_rejects_nan(self):
        with pytest.raises(InvalidParameter):
            DampingConstants(1.0, 1.0, math.nan, 1.0, 1.0, 0.0)

    def test_infinite_markers_allowed(self):
        c = DampingConstants(1.0, INF, 1.0, 1.0, 1.0, INF)
        assert c.to_dict()["gamma"] == INF

    def test_chain(self):
        assert DampingConstants(4.0, INF, 1.05, 2.1, 1.0, 0.2).chain_holds()
        assert not DampingConstants(4.0, INF, 1.05, 1.0, 1.0, 0.2).chain_holds()
        margins = DampingConstants(4.0, 5.0, 1.0, 2.0, 1.0, 0.0).chain_margins()
        assert margins == {
            "mu_sq_minus_beta_delta": 0.0,
            "gamma_minus_beta": 1.0,
            "beta_minus_a0_mu": 2.0,
            "mu_minus_a0_delta": 1.0,
        }

    def test_dominates(self):
        weak = pipe_constants(25, 1, 14)
        strong = DampingConstants(weak.beta * 2, 1e9, weak.delta, weak.mu, weak.a0, weak.k / 2)
        assert strong.dominates(weak)
        assert not weak.dominates(strong)


class TestComputeConstants:
    def test_identity_pair(self):
        c = compute_constants(make_model(np.eye(3), np.eye(3)))
        for name in ("beta", "gamma", "delta", "mu", "a0"):
            assert getattr(c, name) == pytest.approx(1.0, abs=1e-12)
        assert c.k == 0.0

    @pytest.mark.parametrize("n", [1, 3, 8])
    def test_pipe_exact(self, n):
        c = compute_constants(build_pipe(25, 1, 14, n))
        assert c.beta == pytest.approx(PI**4, rel=1e-9)
        assert c.delta == pytest.approx(1 / 25, rel=1e-9)
        assert c.mu == pytest.approx(PI**2 / 5, rel=1e-9)
        assert c.a0 == pytest.approx(5 * PI**2, rel=1e-9)
        assert c.mu**2 == pytest.approx(c.beta * c.delta, rel=1e-9)
        assert c.k <= 14 / PI**3 + 1e-9

    def test_diag_example_two_by_grid_search(self):
        # quotients over the real unit circle
        th = np.linspace(0, 2 * PI, 200001)
        z1, z2 = np.cos(th), np.sin(th)
        r_q = 4 * z2**2
        a_q = z1**2 + 2 * z2**2
        oracle = {
            "beta": r_q.min(),
            "gamma": r_q.max(),
            "delta": (r_q / a_q).min(),
            "mu": (r_q / np.sqrt(a_q)).min(),
            "a0": np.sqrt(a_q.min()),
        }
        c = compute_constants(build_diag_example(2))
        for name, value in oracle.items():
            assert getattr(c, name) == pytest.approx(value, abs=1e-9)
        assert c.k == 0.0

    def test_singular_damping_with_skew_part(self):
        D = np.diag([0.0, 1.0]) + np.array([[0.0, 1.0], [-1.0, 0.0]])
        c = compute_constants(make_model(np.eye(2), D))
        assert c.beta == 0.0 and c.delta == 0.0 and c.mu == 0.0
        assert c.k == INF

    def test_sector_constant_is_optimal(self, rng):
        m = random_model(rng, 5)
        c = compute_constants(m)
        Z = rng.standard_normal((4000, 5)) + 1j * rng.standard_normal((4000, 5))
        q = np.einsum("ij,jk,ik->i", Z.conj(), m.d_matrix, Z)
        assert np.max(np.abs(q.imag) / q.real) <= c.k * (1 + 1e-12)

    def test_deterministic(self, rng):
        m = random_model(rng, 4)
        assert compute_constants(m, seed=3) == compute_constants(m, seed=3)

    @given(st.integers(1, 5), st.integers(0, 2**31))
    def test_chain_holds(self, n, seed):
        c = compute_constants(random_model(np.random.default_rng(seed), n))
        assert c.chain_holds()

    @given(st.integers(1, 5), st.integers(0, 2**31))
    def test_stiffness_bounded_by_damping(self, n, seed):
        m = random_model(np.random.default_rng(seed), n)
        c = compute_constants(m)
        assert stiffness_bound_margin(m, c) >= -1e-6 * linalg.maxabs(m.energy.a_block)

    def test_stiffness_margin_undefined_for_continuum(self, pipe8):
        assert stiffness_bound_margin(pipe8, pipe_constants(25, 1, 14)) == INF


class TestMu:
    def test_bounds_bracket_random_search(self, rng):
        m = random_model(rng, 6)
        lower, upper, z = mu_bounds(m)
        R, A0 = m.damping_hermitian, m.a0_matrix
        Z = rng.standard_normal((5000, 6)) + 1j * rng.standard_normal((5000, 6))
        sampled = min(mu_objective(v, R, A0) for v in Z)
        assert lower <= upper * (1 + 1e-9)
        assert upper <= sampled * (1 + 1e-12)
        assert mu_objective(z, R, A0) == pytest.approx(upper, rel=1e-12)

    @pytest.mark.parametrize("seed", range(5))
    def test_primal_meets_dual(self, seed):
        m = random_model(np.random.default_rng(seed), 5)
        lower, upper, _ = mu_bounds(m)
        assert upper - lower <= 1e-8 * upper


class TestPipeConstants:
    def test_example_parameters(self):
        c = pipe_constants(25, 1, 14)
        assert c.beta == pytest.approx(97.4091, abs=1e-4)
        assert c.delta == pytest.approx(0.04, abs=1e-15)
        assert c.mu == pytest.approx(1.97392, abs=1e-5)
        assert c.k == pytest.approx(0.4515215, abs=1e-7)
        assert c.gamma == INF

    def test_threshold_damping(self):
        c = pipe_constants(25, 10 / PI**2, 14)
        assert c.delta == pytest.approx(0.4 / PI**2, rel=1e-15)
        assert c.beta * c.delta == pytest.approx(4.0, rel=1e-15)

    def test_self_adjoint(self):
        assert pipe_constants(1, 1, 0).k == 0.0

    @pytest.mark.parametrize("args", [(0, 1, 1), (1, 0, 1), (1, 1, -1)])
    def test_invalid(self, args):
        with pytest.raises(InvalidParameter):
            pipe_constants(*args)

    @pytest.mark.parametrize("E,C,K", [(25, 1, 14), (1, 1, 1), (4, 0.5, 3)])
    def test_chain_is_tight(self, E, C, K):
        c = pipe_constants(E, C, K)
        assert c.chain_holds()
        assert c.mu**2 == pytest.approx(c.beta * c.delta, rel=1e-14)
        assert c.beta == pytest.approx(c.a0 * c.mu, rel=1e-14)
