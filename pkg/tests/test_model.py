import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad

from conftest import random_pd
from qnr_enclose import linalg
from qnr_enclose.errors import InvalidParameter, NonHermitianInput, NotAccretive, NotPositiveDefinite
from qnr_enclose.model import (
    build_diag_example,
    build_pipe,
    companion,
    companion_inverse,
    dump_custom,
    gyroscopic_matrix,
    inverse_check,
    load_custom,
    make_model,
    to_energy,
)
from qnr_enclose.ranges import nr_support
from qnr_enclose.spectrum import match_multisets

PI4 = math.pi**4


class TestBuildPipe:
    def test_single_mode(self):
        m = build_pipe(25.0, 1.0, 14.0, 1)
        np.testing.assert_allclose(m.a0_matrix, [[25 * PI4]], rtol=1e-15)
        np.testing.assert_allclose(m.d_matrix, [[PI4]], rtol=1e-15)

    def test_no_gyroscopic_term(self):
        m = build_pipe(1.0, 1.0, 0.0, 3)
        expected = np.diag([PI4, 16 * PI4, 81 * PI4])
        np.testing.assert_allclose(m.d_matrix, expected, rtol=1e-15)
        np.testing.assert_array_equal(m.d_matrix, m.a0_matrix)
        assert m.has_hermitian_damping

    def test_coupling_entry_against_quadrature(self):
        # <phi_2', phi_1> = ∫ 2 sin(πr) 2π cos(2πr) dr
        oracle, _ = quad(lambda r: 2 * math.sin(math.pi * r) * 2 * math.pi * math.cos(2 * math.pi * r), 0, 1)
        G = gyroscopic_matrix(2)
        assert oracle == pytest.approx(-8 / 3, abs=1e-12)
        assert G[0, 1] == pytest.approx(oracle, abs=1e-12)
        assert G[1, 0] == -G[0, 1]

    def test_coupling_entries_against_quadrature(self):
        G = gyroscopic_matrix(5)
        for j in range(1, 6):
            for k in range(1, 6):
                val, _ = quad(lambda r: 2 * k * math.pi * math.cos(k * math.pi * r) * math.sin(j * math.pi * r), 0, 1, limit=200)
                assert G[j - 1, k - 1] == pytest.approx(val, abs=1e-10)

    @pytest.mark.parametrize("n", [1, 2, 5, 16])
    def test_gyroscopic_term_antisymmetric_and_hermitian_part_exact(self, n):
        G = gyroscopic_matrix(n)
        np.testing.assert_array_equal(G + G.T, 0.0)
        m = build_pipe(25.0, 1.3, 14.0, n)
        np.testing.assert_array_equal(m.damping_hermitian, (1.3 / 25.0) * m.a0_matrix)

    @pytest.mark.parametrize("args", [(0, 1, 1, 2), (1, 0, 1, 2), (1, 1, -1, 2), (1, 1, 1, 0), (-1, 1, 1, 2), (1, 1, 1, 2.5)])
    def test_invalid(self, args):
        with pytest.raises(InvalidParameter):
            build_pipe(*args)

    def test_arrays_read_only(self, pipe8):
        with pytest.raises(ValueError):
            pipe8.d_matrix[0, 0] = 1.0


class TestDiagExample:
    def test_two(self):
        m = build_diag_example(2)
        np.testing.assert_array_equal(m.a0_matrix, np.diag([1.0, 2.0]))
        np.testing.assert_array_equal(m.d_matrix, np.diag([0.0, 4.0]))

    def test_one(self):
        np.testing.assert_array_equal(build_diag_example(1).d_matrix, [[0.0]])

    def test_four(self):
        np.testing.assert_array_equal(build_diag_example(4).d_matrix, np.diag([0.0, 4.0, 0.0, 8.0]))

    def test_invalid(self):
        with pytest.raises(InvalidParameter):
            build_diag_example(0)

    @pytest.mark.parametrize("m", [0, 1, 2, 5, 10])
    def test_numerical_range_grows_like_sqrt(self, m):
        n = 2 * m + 1
        support = nr_support(build_diag_example(n), grid_size=8)
        # s(π/2) = max Im W
        assert support.values[2] >= math.sqrt(n) - 1e-6


class TestEnergy:
    def test_scalar(self):
        e = to_energy(make_model([[4.0]], [[1.0]]))
        np.testing.assert_allclose(e.a_block, [[0, 2], [-2, -1]], atol=1e-15)

    def test_identity_stiffness(self, rng):
        D = random_pd(rng, 3)
        e = to_energy(make_model(np.eye(3), D))
        np.testing.assert_allclose(e.s, np.eye(3), atol=1e-15)
        expected = np.block([[np.zeros((3, 3)), np.eye(3)], [-np.eye(3), -D]])
        np.testing.assert_allclose(e.a_block, expected, atol=1e-15)

    def test_blocks_exact(self, pipe8):
        e = pipe8.energy
        n = pipe8.dim
        np.testing.assert_array_equal(e.a_block[:n, :n], 0)
        np.testing.assert_array_equal(e.a_block[:n, n:], e.s)
        np.testing.assert_array_equal(e.a_block[n:, :n], -e.s)
        np.testing.assert_array_equal(e.a_block[n:, n:], -pipe8.d_matrix)

    @pytest.mark.parametrize("model", [build_pipe(25, 1, 14, 2), build_pipe(25, 1, 14, 8), build_diag_example(6)])
    def test_similar_to_companion(self, model):
        a = linalg.general_eig(model.energy.a_block).values
        b = linalg.general_eig(companion(model)).values
        assert match_multisets(a, b) <= 1e-8

    @given(st.integers(1, 6), st.integers(0, 2**31))
    def test_similarity_property(self, n, seed):
        rng = np.random.default_rng(seed)
        model = make_model(random_pd(rng, n, 1.0), random_pd(rng, n, 0.1) + 0.3j * np.eye(n))
        a = linalg.general_eig(model.energy.a_block).values
        assert match_multisets(a, np.linalg.eigvals(companion(model))) <= 1e-8


class TestInverseCheck:
    def test_undamped_identity(self):
        m = make_model(np.eye(2), np.zeros((2, 2)))
        assert inverse_check(m) == 0.0
        np.testing.assert_array_equal(companion_inverse(m), [[0, 0, -1, 0], [0, 0, 0, -1], [1, 0, 0, 0], [0, 1, 0, 0]])

    def test_scalar(self):
        m = make_model([[2.0]], [[1.0]])
        assert inverse_check(m) <= 1e-14
        np.testing.assert_allclose(companion_inverse(m), [[-0.5, -0.5], [1, 0]], atol=1e-16)

    def test_pipe8(self, pipe8):
        assert inverse_check(pipe8) <= 1e-9

    @pytest.mark.parametrize("n", [16, 32])
    def test_relative_contract_larger_pipes(self, n):
        m = build_pipe(25, 1, 14, n)
        bound = 1e-10 * linalg.maxabs(companion(m)) * linalg.maxabs(companion_inverse(m))
        assert inverse_check(m) <= bound


class TestValidation:
    def test_accretive_noise_accepted(self):
        D = np.diag([1.0, -1e-14])
        make_model(np.eye(2), D)

    def test_not_accretive(self):
        with pytest.raises(NotAccretive):
            make_model(np.eye(2), np.diag([1.0, -0.1]))

    def test_not_hermitian(self):
        with pytest.raises(NonHermitianInput):
            make_model([[1.0, 1.0], [0.0, 1.0]], np.eye(2))

    def test_not_positive_definite(self):
        with pytest.raises(NotPositiveDefinite):
            make_model(np.diag([1.0, 0.0]), np.eye(2))

    def test_shape_mismatch(self):
        with pytest.raises(InvalidParameter):
            make_model(np.eye(2), np.eye(3))

    def test_backdoor_skips_checks(self):
        m = make_model(np.eye(2), np.diag([1.0, -1.0]), check=False)
        assert m.d_matrix[1, 1] == -1.0

    @given(st.integers(1, 6), st.integers(0, 2**31))
    def test_accepted_models_are_accretive(self, n, seed):
        rng = np.random.default_rng(seed)
        H = random_pd(rng, n, 0.0)
        X = rng.standard_normal((n, n))
        m = make_model(random_pd(rng, n), H + 1j * (X + X.T))
        low = np.linalg.eigvalsh(m.damping_hermitian)[0]
        assert low >= -1e-12 * linalg.maxabs(m.d_matrix)


class TestCustomFile:
    def test_round_trip(self, tmp_path, rng):
        m = make_model(random_pd(rng, 3), random_pd(rng, 3) + 0.5j * np.eye(3))
        path = tmp_path / "m.json"
        path.write_text(json.dumps(dump_custom(m)))
        back = load_custom(path)
        np.testing.assert_array_equal(back.a0_matrix, m.a0_matrix)
        np.testing.assert_array_equal(back.d_matrix, m.d_matrix)
        assert back.source.kind == "custom"

    @pytest.mark.parametrize(
        "doc",
        [
            {"n": 2, "a0": [[1, 0]], "d": [[1, 0]]},
            {"n": 1, "d": [[1, 0]]},
            {"n": 0, "a0": [], "d": []},
        ],
    )
    def test_malformed(self, tmp_path, doc):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(doc))
        with pytest.raises(InvalidParameter):
            load_custom(path)

    def test_not_json(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{")
        with pytest.raises(InvalidParameter):
            load_custom(path)

    def test_non_accretive_rejected(self, tmp_path):
        doc = {"n": 1, "a0": [[1, 0]], "d": [[-1, 0]]}
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(doc))
        with pytest.raises(NotAccretive):
            load_custom(path)
