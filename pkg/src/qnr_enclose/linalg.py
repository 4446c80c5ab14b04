"""Dense complex linear algebra kernel.

Everything here is written on top of numpy array arithmetic only; the
decompositions themselves (Jacobi, Householder/QR, Cholesky) are implemented
in this module so that the numerical contracts are under our control.
``numpy.linalg`` is used solely as an oracle in the test suite.

Matrices are plain ``numpy.ndarray`` objects of dtype ``complex128``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DidNotConverge, InvalidParameter, NonHermitianInput, NotPositiveDefinite

EPS = np.finfo(float).eps
HERMITIAN_RTOL = 1e-12
JACOBI_MAX_SWEEPS = 100
QR_SWEEPS_PER_DIM = 30
DEFLATION_RTOL = 1e-14


@dataclass(frozen=True)
class EigenResult:
    """Eigenvalues with optional unit eigenvectors.

    Attributes
    ----------
    values : ndarray
        Eigenvalues. Real dtype for Hermitian input (ascending), complex otherwise.
    vectors : ndarray or None
        Column ``j`` is a unit eigenvector for ``values[j]``.
    backward_error : float
        Size of the discarded off-diagonal part relative to ``‖M‖_F``.
    """

    values: np.ndarray
    vectors: np.ndarray | None
    backward_error: float


def as_matrix(M) -> np.ndarray:
    """Return ``M`` as a square ``complex128`` array (always a copy)."""
    A = np.array(M, dtype=complex, copy=True)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] == 0:
        raise InvalidParameter(f"expected a nonempty square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise InvalidParameter("matrix has non-finite entries")
    return A


def maxabs(M) -> float:
    """Largest entry modulus."""
    M = np.asarray(M)
    return float(np.max(np.abs(M))) if M.size else 0.0


def is_hermitian(M, rtol: float = HERMITIAN_RTOL) -> bool:
    """Check ``max |M_jk - conj(M_kj)| <= rtol * maxabs(M)``."""
    M = np.asarray(M)
    return float(np.max(np.abs(M - M.conj().T))) <= rtol * maxabs(M)


def hermitian_part(M) -> np.ndarray:
    M = np.asarray(M, dtype=complex)
    return 0.5 * (M + M.conj().T)


def skew_part(M) -> np.ndarray:
    """Return ``(M - M^H) / (2i)``, the Hermitian matrix with ``M = Re M + i·skew``."""
    M = np.asarray(M, dtype=complex)
    return (M - M.conj().T) / 2j


# ---------------------------------------------------------------------------
# Hermitian eigensolver: parallel-ordered cyclic Jacobi
# ---------------------------------------------------------------------------


@lru_cache(maxsize=64)
def _round_robin(n: int) -> tuple[tuple[np.ndarray, np.ndarray], ...]:
    """Tournament schedule: ``n-1`` (or ``n``) rounds of disjoint index pairs covering all pairs."""
    m = n + (n % 2)
    players = list(range(m))
    rounds = []
    for _ in range(m - 1):
        pairs = [(players[i], players[m - 1 - i]) for i in range(m // 2)]
        pairs = [(min(a, b), max(a, b)) for a, b in pairs if a < n and b < n]
        if pairs:
            p, q = zip(*pairs)
            rounds.append((np.array(p), np.array(q)))
        players = [players[0], players[-1]] + players[1:-1]
    return tuple(rounds)


def _jacobi(A: np.ndarray, want_vectors: bool, max_sweeps: int) -> tuple[np.ndarray, np.ndarray | None, np.ndarray]:
    """Cyclic Jacobi on a stack ``A`` of shape ``(B, n, n)`` (modified in place).

    Every round rotates a set of disjoint index pairs in all matrices at once;
    pairs that are already negligible get the identity rotation. A pair is
    negligible once ``|a_pq|`` is below ``eps·sqrt(|a_pp a_qq|)`` (relative
    accuracy for graded matrices) or below ``1e-2·eps·‖A‖_F``.
    """
    nb, n, _ = A.shape
    V = np.broadcast_to(np.eye(n, dtype=complex), (nb, n, n)).copy() if want_vectors else None
    scale = np.linalg.norm(A, axis=(1, 2))
    abs_floor = (1e-2 * EPS * scale)[:, None]
    rounds = _round_robin(n) if n > 1 else ()
    for _ in range(max_sweeps):
        rotated = False
        for P, Q in rounds:
            apq = A[:, P, Q]
            r = np.abs(apq)
            app = A[:, P, P].real
            aqq = A[:, Q, Q].real
            big = r > np.maximum(EPS * np.sqrt(np.abs(app * aqq)), abs_floor)
            if not big.any():
                continue
            rotated = True
            cols = big.any(axis=0)
            if not cols.all():
                P, Q, apq, r, app, aqq, big = P[cols], Q[cols], apq[:, cols], r[:, cols], app[:, cols], aqq[:, cols], big[:, cols]
            diff = aqq - app
            theta = 0.5 * np.arctan2(2.0 * r * np.where(diff >= 0, 1.0, -1.0), np.abs(diff))
            theta = np.where(big, theta, 0.0)
            c = np.cos(theta)
            s = np.sin(theta)
            ph = np.where(big, apq / np.where(r > 0, r, 1.0), 1.0)  # e^{i phi}
            sp = s * ph.conj()
            cp = c * ph.conj()
            cP, cQ = A[:, :, P], A[:, :, Q]
            A[:, :, P] = cP * c[:, None, :] - cQ * sp[:, None, :]
            A[:, :, Q] = cP * s[:, None, :] + cQ * cp[:, None, :]
            rP, rQ = A[:, P, :], A[:, Q, :]
            A[:, P, :] = c[:, :, None] * rP - sp.conj()[:, :, None] * rQ
            A[:, Q, :] = s[:, :, None] * rP + cp.conj()[:, :, None] * rQ
            A[:, P, Q] = np.where(big, 0.0, A[:, P, Q])
            A[:, Q, P] = np.where(big, 0.0, A[:, Q, P])
            if V is not None:
                vP, vQ = V[:, :, P], V[:, :, Q]
                V[:, :, P] = vP * c[:, None, :] - vQ * sp[:, None, :]
                V[:, :, Q] = vP * s[:, None, :] + vQ * cp[:, None, :]
        if not rotated:
            break
    else:
        raise DidNotConverge(f"Jacobi did not converge in {max_sweeps} sweeps")
    d = np.diagonal(A, axis1=1, axis2=2).real.copy()
    off = np.linalg.norm(A - d[:, :, None] * np.eye(n), axis=(1, 2))
    return d, V, off / np.where(scale > 0, scale, 1.0)


def hermitian_eig(M, vectors: bool = False, max_sweeps: int = JACOBI_MAX_SWEEPS) -> EigenResult:
    """Eigen-decomposition of a Hermitian matrix by cyclic Jacobi rotations.

    Rotations are applied in a round-robin order so that each round touches
    disjoint index pairs and can be applied with vectorized row/column updates.

    Parameters
    ----------
    M : array_like
        Hermitian matrix (checked to ``1e-12`` relative).
    vectors : bool
        Accumulate the eigenvector matrix.
    max_sweeps : int
        Sweep cap; exceeding it raises :class:`DidNotConverge`.

    Returns
    -------
    EigenResult
        Real ascending eigenvalues and, optionally, orthonormal eigenvectors.
    """
    A = as_matrix(M)
    if not is_hermitian(A):
        raise NonHermitianInput("matrix is not Hermitian within 1e-12 relative tolerance")
    d, V, off = _jacobi(hermitian_part(A)[None], vectors, max_sweeps)
    order = np.argsort(d[0], kind="stable")
    return EigenResult(d[0][order], None if V is None else V[0][:, order], float(off[0]))


def _as_hermitian_stack(stack) -> np.ndarray:
    A = np.array(stack, dtype=complex, copy=True)
    if A.ndim != 3 or A.shape[1] != A.shape[2] or A.shape[1] == 0:
        raise InvalidParameter(f"expected a (B, n, n) stack, got shape {A.shape}")
    AH = np.conj(np.swapaxes(A, 1, 2))
    gap = np.max(np.abs(A - AH), axis=(1, 2))
    if np.any(gap > HERMITIAN_RTOL * np.max(np.abs(A), axis=(1, 2))):
        raise NonHermitianInput("stack contains a non-Hermitian matrix")
    return 0.5 * (A + AH)


def tridiagonalize_batch(stack) -> tuple[np.ndarray, np.ndarray]:
    """Householder reduction of each Hermitian matrix in a ``(B, n, n)`` stack.

    Returns the real diagonal ``(B, n)`` and the moduli of the subdiagonal
    ``(B, n-1)``; a diagonal unitary similarity makes the subdiagonal real, so
    these determine the spectrum.
    """
    A = _as_hermitian_stack(stack)
    nb, n, _ = A.shape
    for k in range(n - 2):
        x = A[:, k + 1 :, k].copy()
        alpha = np.linalg.norm(x, axis=1)
        x0 = x[:, 0]
        phase = np.where(np.abs(x0) > 0, x0 / np.where(np.abs(x0) > 0, np.abs(x0), 1.0), 1.0)
        v = x
        v[:, 0] += phase * alpha
        vn = np.linalg.norm(v, axis=1)
        v = np.where(vn[:, None] > 0, v / np.where(vn > 0, vn, 1.0)[:, None], 0.0)
        T = A[:, k + 1 :, k + 1 :]
        w = np.einsum("bij,bj->bi", T, v)
        vw = np.einsum("bi,bi->b", v.conj(), w)
        T -= 2.0 * (v[:, :, None] * w.conj()[:, None, :] + w[:, :, None] * v.conj()[:, None, :])
        T += 4.0 * vw[:, None, None] * v[:, :, None] * v.conj()[:, None, :]
        new = np.where(vn > 0, -phase * alpha, x0)
        A[:, k + 1 :, k] = 0.0
        A[:, k, k + 1 :] = 0.0
        A[:, k + 1, k] = new
        A[:, k, k + 1] = np.conj(new)
    d = np.diagonal(A, axis1=1, axis2=2).real.copy()
    e = np.abs(np.diagonal(A, offset=-1, axis1=1, axis2=2))
    return d, e


def _sturm_count(d: np.ndarray, e2: np.ndarray, x: np.ndarray, pivmin: float) -> np.ndarray:
    """Number of eigenvalues below ``x`` for each tridiagonal in the batch."""
    q = d[:, 0] - x
    q = np.where(np.abs(q) < pivmin, -pivmin, q)
    count = (q < 0).astype(int)
    for i in range(1, d.shape[1]):
        q = (d[:, i] - x) - e2[:, i - 1] / q
        q = np.where(np.abs(q) < pivmin, -pivmin, q)
        count += q < 0
    return count


def hermitian_max_eigvals_batch(stack) -> np.ndarray:
    """Largest eigenvalue of each Hermitian matrix in a ``(B, n, n)`` stack.

    Tridiagonalization followed by Sturm-sequence bisection to full precision.
    """
    d, e = tridiagonalize_batch(stack)
    nb, n = d.shape
    if n == 1:
        return d[:, 0].copy()
    e2 = e * e
    rad = np.zeros_like(d)
    rad[:, :-1] += e
    rad[:, 1:] += e
    lo = np.min(d - rad, axis=1)
    hi = np.max(d + rad, axis=1)
    norm = float(np.max(np.maximum(np.abs(lo), np.abs(hi)))) if nb else 0.0
    pivmin = max(np.finfo(float).tiny, (EPS * norm) ** 2)
    for _ in range(200):
        width = hi - lo
        if np.all(width <= 2.0 * EPS * np.maximum(np.abs(lo), np.abs(hi)) + pivmin):
            break
        mid = 0.5 * (lo + hi)
        all_below = _sturm_count(d, e2, mid, pivmin) == n
        hi = np.where(all_below, mid, hi)
        lo = np.where(all_below, lo, mid)
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# General eigensolver: Householder Hessenberg reduction + shifted QR
# ---------------------------------------------------------------------------


def hessenberg(M, want_q: bool = False) -> tuple[np.ndarray, np.ndarray | None]:
    """Unitary reduction ``M = Q H Q^H`` with ``H`` upper Hessenberg."""
    H = as_matrix(M)
    n = H.shape[0]
    Q = np.eye(n, dtype=complex) if want_q else None
    for k in range(n - 2):
        x = H[k + 1 :, k].copy()
        alpha = np.linalg.norm(x)
        if alpha == 0.0:
            continue
        phase = x[0] / abs(x[0]) if x[0] != 0 else 1.0
        v = x
        v[0] += phase * alpha
        v /= np.linalg.norm(v)
        H[k + 1 :, k:] -= 2.0 * np.outer(v, v.conj() @ H[k + 1 :, k:])
        H[:, k + 1 :] -= 2.0 * np.outer(H[:, k + 1 :] @ v, v.conj())
        if Q is not None:
            Q[:, k + 1 :] -= 2.0 * np.outer(Q[:, k + 1 :] @ v, v.conj())
        H[k + 2 :, k] = 0.0
    return H, Q


def _givens(a: complex, b: complex) -> tuple[float, complex]:
    """Return ``(c, s)`` with ``[[c, s], [-conj(s), c]] @ [a, b] = [rho, 0]``."""
    if b == 0:
        return 1.0, 0.0
    if a == 0:
        return 0.0, complex(np.conj(b) / abs(b))
    aa = abs(a)
    rho = math.hypot(aa, abs(b))
    return aa / rho, complex((a / aa) * np.conj(b) / rho)


def _wilkinson_shift(a: complex, b: complex, c: complex, d: complex) -> complex:
    """Eigenvalue of ``[[a, b], [c, d]]`` closest to ``d``."""
    half = 0.5 * (a - d)
    bc = b * c
    root = np.sqrt(half * half + bc)
    den = half + root if abs(half + root) >= abs(half - root) else half - root
    if den == 0:
        return complex(d)
    return complex(d - bc / den)


def _schur(H: np.ndarray, Z: np.ndarray | None, full: bool) -> float:
    """Reduce Hessenberg ``H`` in place to upper triangular form.

    With ``full`` false only the active window is updated, which is enough for
    eigenvalues. Returns the Frobenius norm of the discarded subdiagonal.
    """
    n = H.shape[0]
    norm = float(np.linalg.norm(H))
    abs_floor = EPS * norm
    max_iter = QR_SWEEPS_PER_DIM * n
    total = 0
    dropped = 0.0
    hi = n - 1
    stalled = 0
    while hi > 0:
        lo = hi
        while lo > 0:
            s = abs(H[lo, lo - 1])
            if s <= DEFLATION_RTOL * (abs(H[lo - 1, lo - 1]) + abs(H[lo, lo])) or s <= abs_floor:
                dropped += s * s
                H[lo, lo - 1] = 0.0
                break
            lo -= 1
        if lo == hi:
            hi -= 1
            stalled = 0
            continue
        total += 1
        stalled += 1
        if total > max_iter:
            raise DidNotConverge(f"QR iteration exceeded {max_iter} sweeps")
        if stalled % 11 == 10:
            # exceptional shift to break cycles
            shift = H[hi, hi] + abs(H[hi, hi - 1].real) + (abs(H[hi - 1, hi - 2].real) if hi - 2 >= lo else 0.0)
        else:
            shift = _wilkinson_shift(H[hi - 1, hi - 1], H[hi - 1, hi], H[hi, hi - 1], H[hi, hi])
        c_end = n if full else hi + 1
        r_start = 0 if full else lo
        idx = np.arange(lo, hi + 1)
        H[idx, idx] -= shift
        rots = []
        for k in range(lo, hi):
            c, s = _givens(H[k, k], H[k + 1, k])
            rk = H[k, k:c_end].copy()
            rk1 = H[k + 1, k:c_end]
            H[k, k:c_end] = c * rk + s * rk1
            H[k + 1, k:c_end] = -np.conj(s) * rk + c * rk1
            rots.append((c, s))
        for k, (c, s) in zip(range(lo, hi), rots):
            r_end = min(k + 2, hi) + 1
            ck = H[r_start:r_end, k].copy()
            ck1 = H[r_start:r_end, k + 1]
            H[r_start:r_end, k] = c * ck + np.conj(s) * ck1
            H[r_start:r_end, k + 1] = -s * ck + c * ck1
            if Z is not None:
                zk = Z[:, k].copy()
                zk1 = Z[:, k + 1]
                Z[:, k] = c * zk + np.conj(s) * zk1
                Z[:, k + 1] = -s * zk + c * zk1
        H[idx, idx] += shift
    return math.sqrt(dropped) / norm if norm > 0 else 0.0


def _triangular_eigvecs(T: np.ndarray) -> np.ndarray:
    """Eigenvectors of an upper triangular matrix by back substitution."""
    n = T.shape[0]
    Y = np.zeros((n, n), dtype=complex)
    tiny = EPS * max(maxabs(T), np.finfo(float).tiny)
    diag = T.diagonal()
    for k in range(n):
        y = np.zeros(k + 1, dtype=complex)
        y[k] = 1.0
        lam = diag[k]
        for i in range(k - 1, -1, -1):
            piv = diag[i] - lam
            if abs(piv) < tiny:
                piv = tiny
            y[i] = -(T[i, i + 1 : k + 1] @ y[i + 1 : k + 1]) / piv
        Y[: k + 1, k] = y / np.linalg.norm(y)
    return Y


def balance(M) -> tuple[np.ndarray, np.ndarray]:
    """Diagonal similarity ``B = T^{-1} M T`` with power-of-two scales equalizing row and column norms.

    Returns ``(B, t)`` with ``t`` the diagonal of ``T``. Scaling by powers of
    two is exact, so eigenvalues are unchanged while badly scaled inputs (such
    as companion linearizations) become much better conditioned.
    """
    B = as_matrix(M)
    n = B.shape[0]
    t = np.ones(n)
    radix = 2.0
    converged = False
    while not converged:
        converged = True
        for i in range(n):
            c = float(np.sum(np.abs(B[:, i]))) - abs(B[i, i])
            r = float(np.sum(np.abs(B[i, :]))) - abs(B[i, i])
            if c == 0.0 or r == 0.0:
                continue
            g = r / radix
            f = 1.0
            total = c + r
            while c < g:
                f *= radix
                c *= radix * radix
            g = r * radix
            while c >= g:
                f /= radix
                c /= radix * radix
            if (c + r) / f < 0.95 * total:
                converged = False
                t[i] *= f
                B[i, :] /= f
                B[:, i] *= f
    return B, t


def general_eig(M, vectors: bool = False, balanced: bool = True) -> EigenResult:
    """All eigenvalues (with multiplicity) of a general complex matrix.

    Optional power-of-two balancing, then Householder reduction to Hessenberg
    form followed by explicit single-shift QR sweeps with Wilkinson shifts and
    Givens rotations.

    Raises
    ------
    DidNotConverge
        After ``30 n`` QR sweeps.
    """
    A = as_matrix(M)
    n = A.shape[0]
    if n == 1:
        return EigenResult(A.diagonal().copy(), np.ones((1, 1), dtype=complex) if vectors else None, 0.0)
    t = None
    if balanced:
        A, t = balance(A)
    H, Z = hessenberg(A, want_q=vectors)
    err = _schur(H, Z, full=vectors)
    values = H.diagonal().copy()
    V = None
    if vectors:
        V = Z @ _triangular_eigvecs(np.triu(H))
        if t is not None:
            V *= t[:, None]
        V /= np.linalg.norm(V, axis=0)
    return EigenResult(values, V, err)


# ---------------------------------------------------------------------------
# Cholesky, triangular solves, square roots, pencils
# ---------------------------------------------------------------------------


def cholesky(M) -> np.ndarray:
    """Lower-triangular ``L`` with ``L L^H = M``.

    Raises
    ------
    NotPositiveDefinite
        When a pivot is not strictly positive.
    """
    A = as_matrix(M)
    if not is_hermitian(A):
        raise NonHermitianInput("Cholesky needs a Hermitian matrix")
    n = A.shape[0]
    L = np.zeros_like(A)
    for j in range(n):
        row = L[j, :j]
        pivot = A[j, j].real - float(np.vdot(row, row).real)
        if not pivot > 0.0:
            raise NotPositiveDefinite(f"nonpositive pivot {pivot:.3e} at index {j}")
        L[j, j] = math.sqrt(pivot)
        if j + 1 < n:
            L[j + 1 :, j] = (A[j + 1 :, j] - L[j + 1 :, :j] @ row.conj()) / L[j, j]
    return L


def solve_lower(L: np.ndarray, B) -> np.ndarray:
    """Forward substitution for ``L X = B`` (``B`` vector or matrix)."""
    B = np.array(B, dtype=complex, copy=True)
    vec = B.ndim == 1
    X = B.reshape(B.shape[0], -1)
    for i in range(L.shape[0]):
        X[i] = (X[i] - L[i, :i] @ X[:i]) / L[i, i]
    return X[:, 0] if vec else X


def solve_upper(U: np.ndarray, B) -> np.ndarray:
    """Back substitution for ``U X = B``."""
    B = np.array(B, dtype=complex, copy=True)
    vec = B.ndim == 1
    X = B.reshape(B.shape[0], -1)
    n = U.shape[0]
    for i in range(n - 1, -1, -1):
        X[i] = (X[i] - U[i, i + 1 :] @ X[i + 1 :]) / U[i, i]
    return X[:, 0] if vec else X


def solve_pd(M, B) -> np.ndarray:
    """Solve ``M X = B`` for Hermitian positive definite ``M`` via Cholesky."""
    L = cholesky(M)
    return solve_upper(L.conj().T, solve_lower(L, B))


def sqrt_pd_with_inverse(M) -> tuple[np.ndarray, np.ndarray]:
    """Principal square root of a Hermitian positive definite matrix and its inverse."""
    eig = hermitian_eig(M, vectors=True)
    if not eig.values[0] > 0.0:
        raise NotPositiveDefinite(f"smallest eigenvalue {eig.values[0]:.3e} is not positive")
    V = eig.vectors
    r = np.sqrt(eig.values)
    S = (V * r) @ V.conj().T
    S_inv = (V / r) @ V.conj().T
    return hermitian_part(S), hermitian_part(S_inv)


def sqrt_pd(M) -> np.ndarray:
    """Principal square root ``S`` with ``S S = M``, via :func:`hermitian_eig`."""
    return sqrt_pd_with_inverse(M)[0]


def pencil_eig(N, P, vectors: bool = False) -> EigenResult:
    """Eigenpairs of the Hermitian-definite pencil ``N x = λ P x``.

    Reduces to ``L^{-1} N L^{-H}`` with ``P = L L^H``. Returned vectors are
    ``P``-orthonormal.
    """
    N = as_matrix(N)
    if not is_hermitian(N):
        raise NonHermitianInput("pencil numerator must be Hermitian")
    L = cholesky(P)
    Y = solve_lower(L, N)
    X = hermitian_part(solve_lower(L, Y.conj().T).conj().T)
    eig = hermitian_eig(X, vectors=vectors)
    if not vectors:
        return eig
    return EigenResult(eig.values, solve_upper(L.conj().T, eig.vectors), eig.backward_error)


def pencil_max_abs(N, P) -> float:
    """``max |z^H N z| / (z^H P z)`` over nonzero ``z``: largest modulus pencil eigenvalue."""
    vals = pencil_eig(N, P).values
    return float(max(abs(vals[0]), abs(vals[-1])))
