import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from numpy.polynomial import polynomial as P

from conftest import random_hermitian, random_pd
from qnr_enclose import linalg
from qnr_enclose.errors import DidNotConverge, InvalidParameter, NonHermitianInput, NotPositiveDefinite


def charpoly_by_cofactors(M):
    """Coefficients (ascending) of det(M - λI) by Laplace expansion along the first row."""
    n = M.shape[0]
    entries = [[np.array([M[i, j]]) if i != j else np.array([M[i, j], -1.0]) for j in range(n)] for i in range(n)]

    def det(rows, cols):
        if len(rows) == 1:
            return entries[rows[0]][cols[0]]
        total = np.zeros(1, dtype=complex)
        for pos, c in enumerate(cols):
            minor = det(rows[1:], cols[:pos] + cols[pos + 1 :])
            term = P.polymul(entries[rows[0]][c], minor)
            total = P.polyadd(total, term if pos % 2 == 0 else -term)
        return total

    return det(list(range(n)), list(range(n)))


def sorted_complex(z):
    z = np.asarray(z, dtype=complex)
    return z[np.lexsort((np.round(z.imag, 8), np.round(z.real, 8)))]


def unitary(rng, n):
    Q, R = np.linalg.qr(rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))
    return Q * (np.diag(R) / np.abs(np.diag(R)))


class TestHermitianEig:
    def test_identity(self):
        res = linalg.hermitian_eig(np.eye(3))
        np.testing.assert_array_equal(res.values, [1.0, 1.0, 1.0])

    def test_diagonal(self):
        res = linalg.hermitian_eig(np.diag([3.0, 1.0, 2.0]))
        np.testing.assert_allclose(res.values, [1.0, 2.0, 3.0], atol=0)

    def test_random_4x4_matches_characteristic_polynomial(self, rng):
        M = random_hermitian(rng, 4)
        oracle = np.sort(P.polyroots(charpoly_by_cofactors(M)).real)
        np.testing.assert_allclose(linalg.hermitian_eig(M).values, oracle, atol=1e-9)

    def test_values_are_real_dtype(self, rng):
        res = linalg.hermitian_eig(random_hermitian(rng, 5))
        assert res.values.dtype == np.float64

    @pytest.mark.parametrize("n", [1, 2, 7, 20])
    def test_residual_contract_and_orthonormality(self, rng, n):
        M = random_hermitian(rng, n)
        res = linalg.hermitian_eig(M, vectors=True)
        V = res.vectors
        resid = np.linalg.norm(M @ V - V * res.values, axis=0)
        assert np.all(resid <= 1e-10 * linalg.maxabs(M) * np.sqrt(n))
        np.testing.assert_allclose(V.conj().T @ V, np.eye(n), atol=1e-12)

    def test_agrees_with_numpy(self, rng):
        M = random_hermitian(rng, 30)
        np.testing.assert_allclose(linalg.hermitian_eig(M).values, np.linalg.eigvalsh(M), atol=1e-11)

    def test_rejects_non_hermitian(self):
        with pytest.raises(NonHermitianInput):
            linalg.hermitian_eig(np.array([[1.0, 2.0], [0.0, 1.0]]))

    def test_sweep_cap_raises(self, rng):
        with pytest.raises(DidNotConverge):
            linalg.hermitian_eig(random_hermitian(rng, 8), max_sweeps=1)

    def test_rejects_non_square(self):
        with pytest.raises(InvalidParameter):
            linalg.hermitian_eig(np.ones((2, 3)))

    @given(st.integers(1, 10), st.integers(0, 2**31))
    def test_unitary_invariance(self, n, seed):
        rng = np.random.default_rng(seed)
        M = random_hermitian(rng, n)
        U = unitary(rng, n)
        a = linalg.hermitian_eig(M).values
        b = linalg.hermitian_eig(linalg.hermitian_part(U.conj().T @ M @ U)).values
        np.testing.assert_allclose(a, b, atol=1e-9 * max(1.0, np.abs(a).max()))


class TestBatchedLargestEigenvalue:
    def test_matches_numpy(self, rng):
        stack = np.array([random_hermitian(rng, 9) for _ in range(12)])
        expected = np.linalg.eigvalsh(stack)[:, -1]
        np.testing.assert_allclose(linalg.hermitian_max_eigvals_batch(stack), expected, rtol=1e-13, atol=1e-13)

    def test_scalar_and_diagonal(self):
        stack = np.array([np.diag([1.0, -4.0, 2.5]), np.diag([-1.0, -2.0, -3.0])])
        np.testing.assert_allclose(linalg.hermitian_max_eigvals_batch(stack), [2.5, -1.0], atol=1e-15)


class TestGeneralEig:
    def test_rotation(self):
        vals = sorted_complex(linalg.general_eig([[0.0, 1.0], [-1.0, 0.0]]).values)
        np.testing.assert_allclose(vals, [-1j, 1j], atol=1e-14)

    def test_triangular(self):
        T = np.array([[2.0, 1.0, 4.0], [0.0, 5.0, -3.0], [0.0, 0.0, -1.0]])
        vals = np.sort(linalg.general_eig(T).values.real)
        np.testing.assert_allclose(vals, [-1.0, 2.0, 5.0], atol=1e-13)

    def test_companion_of_cubic(self):
        # λ³ - 6λ² + 11λ - 6 = (λ-1)(λ-2)(λ-3)
        C = np.array([[6.0, -11.0, 6.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
        vals = linalg.general_eig(C).values
        np.testing.assert_allclose(np.sort(vals.real), [1.0, 2.0, 3.0], atol=1e-12)
        np.testing.assert_allclose(vals.imag, 0.0, atol=1e-12)

    @pytest.mark.parametrize("n", [3, 10, 40])
    def test_matches_numpy_and_vectors(self, rng, n):
        M = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        res = linalg.general_eig(M, vectors=True)
        ref = np.linalg.eigvals(M)
        for lam in ref:
            assert np.min(np.abs(res.values - lam)) <= 1e-10 * np.abs(ref).max()
        resid = np.linalg.norm(M @ res.vectors - res.vectors * res.values, axis=0)
        assert np.all(resid <= 1e-10 * linalg.maxabs(M) * np.sqrt(n))

    def test_scalar(self):
        assert linalg.general_eig([[3.5 - 1j]]).values[0] == 3.5 - 1j

    def test_sweep_cap_raises(self, rng, monkeypatch):
        monkeypatch.setattr(linalg, "QR_SWEEPS_PER_DIM", 0)
        with pytest.raises(DidNotConverge):
            linalg.general_eig(rng.standard_normal((6, 6)))

    def test_balancing_preserves_spectrum(self, rng):
        D = np.diag(10.0 ** np.arange(-4, 5))
        M = D @ rng.standard_normal((9, 9)) @ np.linalg.inv(D)
        B, t = linalg.balance(M)
        np.testing.assert_allclose(B, (M * t[None, :]) / t[:, None], rtol=0, atol=0)
        a = np.abs(linalg.general_eig(M).values)
        assert np.allclose(np.sort(a), np.sort(np.abs(np.linalg.eigvals(M))), rtol=1e-8)

    @given(st.integers(2, 9), st.integers(0, 2**31))
    def test_conjugate_input_conjugates_spectrum(self, n, seed):
        rng = np.random.default_rng(seed)
        M = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        a = linalg.general_eig(M).values
        b = np.conj(linalg.general_eig(np.conj(M)).values)
        scale = np.abs(a).max()
        for lam in a:
            assert np.min(np.abs(b - lam)) <= 1e-9 * scale


class TestCholesky:
    def test_identity(self):
        np.testing.assert_array_equal(linalg.cholesky(np.eye(3)), np.eye(3))

    def test_diagonal(self):
        np.testing.assert_allclose(linalg.cholesky(np.diag([4.0, 9.0])), np.diag([2.0, 3.0]))

    def test_reproduces_input(self):
        M = np.array([[2.0, 1.0], [1.0, 2.0]])
        L = linalg.cholesky(M)
        assert np.allclose(np.triu(L, 1), 0)
        np.testing.assert_allclose(L @ L.conj().T, M, atol=1e-14)

    def test_complex_random(self, rng):
        M = random_pd(rng, 12)
        L = linalg.cholesky(M)
        assert np.max(np.abs(L @ L.conj().T - M)) <= 1e-12 * linalg.maxabs(M)

    @pytest.mark.parametrize("M", [np.diag([1.0, 0.0]), np.diag([1.0, -2.0]), np.array([[1.0, 2.0], [2.0, 1.0]])])
    def test_not_positive_definite(self, M):
        with pytest.raises(NotPositiveDefinite):
            linalg.cholesky(M)

    def test_solve_pd(self, rng):
        M = random_pd(rng, 6)
        b = rng.standard_normal(6) + 1j * rng.standard_normal(6)
        np.testing.assert_allclose(M @ linalg.solve_pd(M, b), b, atol=1e-12)


class TestSqrtPd:
    def test_diagonal(self):
        np.testing.assert_allclose(linalg.sqrt_pd(np.diag([4.0, 16.0])), np.diag([2.0, 4.0]), atol=1e-14)

    def test_identity(self):
        np.testing.assert_allclose(linalg.sqrt_pd(np.eye(4)), np.eye(4), atol=1e-15)

    def test_squares_back(self):
        M = np.array([[5.0, 4.0], [4.0, 5.0]])
        S = linalg.sqrt_pd(M)
        np.testing.assert_allclose(S @ S, M, atol=1e-12)
        assert np.all(np.linalg.eigvalsh(S) > 0)

    def test_inverse(self, rng):
        S, S_inv = linalg.sqrt_pd_with_inverse(random_pd(rng, 7))
        np.testing.assert_allclose(S @ S_inv, np.eye(7), atol=1e-11)

    def test_rejects_indefinite(self):
        with pytest.raises(NotPositiveDefinite):
            linalg.sqrt_pd(np.diag([1.0, -1.0]))

    @given(st.integers(1, 64), st.integers(0, 2**31))
    def test_square_property(self, n, seed):
        M = random_pd(np.random.default_rng(seed), n)
        S = linalg.sqrt_pd(M)
        assert np.max(np.abs(S @ S - M)) <= 1e-10 * linalg.maxabs(M)


class TestPencil:
    def test_zero_numerator(self):
        assert linalg.pencil_max_abs(np.zeros((2, 2)), np.eye(2)) == 0.0

    def test_identity_pencil(self, rng):
        Pm = random_pd(rng, 4)
        assert linalg.pencil_max_abs(Pm, Pm) == pytest.approx(1.0, abs=1e-12)

    def test_hand_solved(self):
        # det(N - λP) = 4λ² - 1
        assert linalg.pencil_max_abs([[0.0, 1.0], [1.0, 0.0]], np.diag([1.0, 4.0])) == pytest.approx(0.5, abs=1e-14)

    def test_vectors_orthonormal_in_pencil_metric(self, rng):
        N, Pm = random_hermitian(rng, 5), random_pd(rng, 5)
        res = linalg.pencil_eig(N, Pm, vectors=True)
        X = res.vectors
        np.testing.assert_allclose(X.conj().T @ Pm @ X, np.eye(5), atol=1e-10)
        np.testing.assert_allclose(N @ X, Pm @ X * res.values, atol=1e-10)

    def test_indefinite_denominator(self):
        with pytest.raises(NotPositiveDefinite):
            linalg.pencil_max_abs(np.eye(2), np.diag([1.0, -1.0]))

    @given(st.integers(1, 8), st.integers(0, 2**31))
    def test_congruence_invariance(self, n, seed):
        rng = np.random.default_rng(seed)
        N, Pm = random_hermitian(rng, n), random_pd(rng, n)
        C = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)) + 3 * np.eye(n)
        a = linalg.pencil_max_abs(N, Pm)
        b = linalg.pencil_max_abs(
            linalg.hermitian_part(C.conj().T @ N @ C), linalg.hermitian_part(C.conj().T @ Pm @ C)
        )
        assert b == pytest.approx(a, rel=1e-9, abs=1e-12)


def test_hermitian_flag_tolerance():
    M = np.array([[1.0, 1.0 + 1e-13], [1.0, 1.0]])
    assert linalg.is_hermitian(M)
    assert not linalg.is_hermitian(np.array([[1.0, 1.0 + 1e-9], [1.0, 1.0]]))


def test_skew_part_reassembles():
    M = np.array([[1.0 + 2j, 3.0], [-1j, 0.5]])
    np.testing.assert_allclose(linalg.hermitian_part(M) + 1j * linalg.skew_part(M), M, atol=1e-15)
