"""Numerical range and quadratic numerical range sampling.

Inner products follow ``<x, y> = y^H x``. The energy inner product
``<f, g>_{1/2}`` is ``<Sf, Sg> = g^H A0 f``.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from . import linalg
from .errors import InvalidParameter, ZeroVector
from .model import ModelPair

STRATEGIES = ("random", "axis", "boundary")
DEFAULT_GRID = 720
BOUNDARY_DIRECTIONS = 64


@dataclass(frozen=True, eq=False)
class QnrSample:
    """Vector pair with the two roots of its 2×2 compression (``lambda1`` has larger real part)."""

    f: np.ndarray
    g: np.ndarray
    lambda1: complex
    lambda2: complex


@dataclass(frozen=True, eq=False)
class SupportFunction:
    """``values[j] = max Re(e^{-i angles[j]} w)`` over the numerical range."""

    angles: np.ndarray
    values: np.ndarray
    scale: float

    def default_tol(self) -> float:
        return 1e-8 * self.scale


def _check_vectors(model: ModelPair, f, g) -> tuple[np.ndarray, np.ndarray]:
    f = np.asarray(f, dtype=complex).reshape(-1)
    g = np.asarray(g, dtype=complex).reshape(-1)
    if f.shape != (model.dim,) or g.shape != (model.dim,):
        raise InvalidParameter(f"vectors must have length {model.dim}")
    if not np.any(f) or not np.any(g):
        raise ZeroVector("f and g must be nonzero")
    return f, g


def qnr_matrix(model: ModelPair, f, g) -> np.ndarray:
    """2×2 compression of the energy block onto ``span{(f, 0)} ⊕ span{(0, g)}``."""
    f, g = _check_vectors(model, f, g)
    S = model.energy.s
    sf = S @ f
    nf = float(np.linalg.norm(sf))
    ng = float(np.linalg.norm(g))
    coupling = np.vdot(sf, S @ g) / (nf * ng)
    lower = -np.vdot(g, model.a0_matrix @ f) / (nf * ng)
    damping = -np.vdot(g, model.d_matrix @ g) / ng**2
    return np.array([[0.0, coupling], [lower, damping]], dtype=complex)


def quadratic_roots(b: complex, c: complex) -> tuple[complex, complex]:
    """Roots of ``λ² + bλ + c`` ordered by real part, then imaginary part, descending.

    The larger-magnitude root comes from the branch avoiding cancellation; the
    other one from the product of roots.
    """
    disc = np.sqrt(complex(b * b - 4.0 * c))
    q1 = -0.5 * (b + disc)
    q2 = -0.5 * (b - disc)
    q = q1 if abs(q1) >= abs(q2) else q2
    if q == 0:
        r1 = r2 = 0j
    else:
        r1, r2 = complex(q), complex(c / q)
    return _order(r1, r2)


def _order(r1: complex, r2: complex) -> tuple[complex, complex]:
    tie = 1e-14 * max(abs(r1), abs(r2))
    if abs(r1.real - r2.real) <= tie:
        return (r1, r2) if r1.imag >= r2.imag else (r2, r1)
    return (r1, r2) if r1.real > r2.real else (r2, r1)


def qnr_coefficients(model: ModelPair, f, g) -> tuple[complex, float]:
    """``(⟨Dg,g⟩/‖g‖², |⟨f,g⟩_{1/2}|² / (‖f‖²_{1/2} ‖g‖²))`` for ``λ² + bλ + c``."""
    f, g = _check_vectors(model, f, g)
    af = model.a0_matrix @ f
    nf2 = float(np.vdot(f, af).real)
    ng2 = float(np.vdot(g, g).real)
    b = complex(np.vdot(g, model.d_matrix @ g) / ng2)
    if model.has_hermitian_damping:
        b = complex(b.real)
    c = float(abs(np.vdot(g, af)) ** 2 / (nf2 * ng2))
    return b, c


def qnr_roots(model: ModelPair, f, g) -> tuple[complex, complex]:
    """Both eigenvalues of :func:`qnr_matrix` from the characteristic quadratic."""
    return quadratic_roots(*qnr_coefficients(model, f, g))


def qnr_residual(model: ModelPair, f, g, lam: complex) -> float:
    """``|λ² + bλ + c|`` for the quadratic of ``(f, g)``."""
    b, c = qnr_coefficients(model, f, g)
    return abs(lam * lam + b * lam + c)


def _batch_roots(model: ModelPair, F: np.ndarray, G: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized roots for the rows of ``F`` and ``G`` (same ordering as :func:`quadratic_roots`)."""
    AF = F @ model.a0_matrix.T
    nf2 = np.einsum("ij,ij->i", F.conj(), AF).real
    ng2 = np.einsum("ij,ij->i", G.conj(), G).real
    b = np.einsum("ij,ij->i", G.conj(), G @ model.d_matrix.T) / ng2
    if model.has_hermitian_damping:
        b = b.real + 0j
    c = np.abs(np.einsum("ij,ij->i", G.conj(), AF)) ** 2 / (nf2 * ng2)
    disc = np.sqrt(b * b - 4.0 * c + 0j)
    q1 = -0.5 * (b + disc)
    q2 = -0.5 * (b - disc)
    q = np.where(np.abs(q1) >= np.abs(q2), q1, q2)
    safe = np.where(q == 0, 1.0, q)
    r1 = np.where(q == 0, 0.0, q)
    r2 = np.where(q == 0, 0.0, c / safe)
    tie = 1e-14 * np.maximum(np.abs(r1), np.abs(r2))
    first = np.where(
        np.abs(r1.real - r2.real) <= tie,
        r1.imag >= r2.imag,
        r1.real > r2.real,
    )
    return np.where(first, r1, r2), np.where(first, r2, r1)


def _gaussian(rng: np.random.Generator, shape) -> np.ndarray:
    # real and imaginary parts interleaved so that a longer draw extends a shorter one
    x = rng.standard_normal((*shape, 2))
    return x[..., 0] + 1j * x[..., 1]


def _normalize_pairs(model: ModelPair, F: np.ndarray, G: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    S = model.energy.s
    F = F / np.linalg.norm(F @ S.T, axis=1)[:, None]
    G = G / np.linalg.norm(G, axis=1)[:, None]
    return F, G


def _samples(F, G, r1, r2) -> list[QnrSample]:
    return [QnrSample(F[i], G[i], complex(r1[i]), complex(r2[i])) for i in range(len(r1))]


def _random_pairs(model: ModelPair, count: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    # f and g rows are drawn from separate child streams, so row i depends only on (seed, i)
    f_stream, g_stream = np.random.default_rng(seed).spawn(2)
    F = _gaussian(f_stream, (count, model.dim))
    G = _gaussian(g_stream, (count, model.dim))
    return _normalize_pairs(model, F, G)


def orthogonal_partner(model: ModelPair, g: np.ndarray) -> np.ndarray | None:
    """A basis-derived ``f`` with ``⟨f, g⟩_{1/2} = 0``, or ``None`` when ``n = 1``."""
    if model.dim < 2:
        return None
    w = model.a0_matrix @ g
    E = np.eye(model.dim, dtype=complex)
    cand = E - np.outer(w, w.conj() @ E) / np.vdot(w, w)
    j = int(np.argmax(np.linalg.norm(cand, axis=0)))
    return cand[:, j]


def axis_pairs(model: ModelPair) -> tuple[np.ndarray, np.ndarray]:
    """All pairs from standard basis vectors and eigenvectors of ``(D + D^H)/2``.

    Each ``g`` candidate is also paired with an energy-orthogonal ``f`` so that
    the root pair ``{0, -⟨Dg,g⟩/‖g‖²}`` appears.
    """
    n = model.dim
    basis = np.eye(n, dtype=complex)
    r_vecs = linalg.hermitian_eig(model.damping_hermitian, vectors=True).vectors
    cands = np.concatenate([basis, r_vecs.T], axis=0)
    F = np.repeat(cands, len(cands), axis=0)
    G = np.tile(cands, (len(cands), 1))
    extra_f, extra_g = [], []
    for g in cands:
        f = orthogonal_partner(model, g)
        if f is not None:
            extra_f.append(f)
            extra_g.append(g)
    if extra_f:
        F = np.concatenate([F, np.array(extra_f)], axis=0)
        G = np.concatenate([G, np.array(extra_g)], axis=0)
    return _normalize_pairs(model, F, G)


def _thread_count() -> int:
    try:
        return max(1, int(os.environ.get("QNR_ENCLOSE_THREADS", "1")))
    except ValueError:
        return 1


def _split(x: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    return x[:n] + 1j * x[n : 2 * n], x[2 * n : 3 * n] + 1j * x[3 * n :]


def _boundary_direction(
    model: ModelPair, theta: float, seeds: tuple[np.ndarray, np.ndarray], rng: np.random.Generator, restarts: int, max_iter: int
) -> QnrSample:
    """Maximize ``Re(e^{-iθ} λ(f, g))`` over both roots by restarted Nelder-Mead."""
    n = model.dim
    rot = np.exp(-1j * theta)

    def objective(x):
        f, g = _split(x, n)
        if not np.any(f) or not np.any(g):
            return 0.0
        r1, r2 = qnr_roots(model, f, g)
        return -max((rot * r1).real, (rot * r2).real)

    best_x, best_val = None, math.inf
    starts = [np.concatenate([seeds[0].real, seeds[0].imag, seeds[1].real, seeds[1].imag])]
    starts += [rng.standard_normal(4 * n) for _ in range(restarts - 1)]
    for x0 in starts:
        res = minimize(objective, x0, method="Nelder-Mead", options={"maxiter": max_iter, "fatol": 1e-9, "xatol": 1e-9})
        if res.fun < best_val:
            best_val, best_x = res.fun, res.x
    f, g = _split(best_x, n)
    F, G = _normalize_pairs(model, f[None, :], g[None, :])
    r1, r2 = qnr_roots(model, F[0], G[0])
    return QnrSample(F[0], G[0], r1, r2)


def sample_qnr(
    model: ModelPair,
    strategy: str = "random",
    count: int = 1000,
    seed: int = 0,
    restarts: int = 20,
    max_iter: int = 500,
) -> list[QnrSample]:
    """Sample points of the quadratic numerical range.

    Parameters
    ----------
    strategy : {"random", "axis", "boundary"}
        ``random``: ``count`` pairs of normalized complex Gaussians.
        ``axis``: deterministic pairs from basis and damping eigenvectors (``count`` ignored).
        ``boundary``: ``count`` angles on a uniform grid; for each, the pair
        maximizing ``Re(e^{-iθ}λ)`` found by Nelder-Mead with ``restarts``
        starts of at most ``max_iter`` iterations each.
    count : int
        Number of samples (or directions for ``boundary``).
    seed : int
        Base seed; output is a deterministic function of the arguments.
    """
    if strategy not in STRATEGIES:
        raise InvalidParameter(f"unknown strategy {strategy!r}; choose from {STRATEGIES}")
    if int(count) != count or count < 1:
        raise InvalidParameter(f"count must be a positive integer, got {count}")
    count = int(count)
    if strategy == "random":
        F, G = _random_pairs(model, count, seed)
        return _samples(F, G, *_batch_roots(model, F, G))
    if strategy == "axis":
        F, G = axis_pairs(model)
        return _samples(F, G, *_batch_roots(model, F, G))

    if restarts < 1 or max_iter < 1:
        raise InvalidParameter("restarts and max_iter must be positive")
    # pool of random pairs; the best one for each direction seeds the first restart
    pool_f, pool_g = _random_pairs(model, 256, seed)
    p1, p2 = _batch_roots(model, pool_f, pool_g)
    thetas = 2.0 * math.pi * np.arange(count) / count
    streams = np.random.default_rng(seed + 1).spawn(count)

    def run(j: int) -> QnrSample:
        rot = np.exp(-1j * thetas[j])
        score = np.maximum((rot * p1).real, (rot * p2).real)
        i = int(np.argmax(score))
        return _boundary_direction(model, thetas[j], (pool_f[i], pool_g[i]), streams[j], restarts, max_iter)

    threads = _thread_count()
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(run, range(count)))
    return [run(j) for j in range(count)]


def nr_support(model: ModelPair, grid_size: int = DEFAULT_GRID, chunk: int = 120) -> SupportFunction:
    """Support function of the numerical range of the energy block on a uniform angle grid.

    ``s(θ) = λ_max(cos θ·Re Ã + sin θ·Im Ã)``, solved for ``chunk`` angles at a time.
    """
    if int(grid_size) != grid_size or grid_size < 8:
        raise InvalidParameter(f"grid_size must be an integer >= 8, got {grid_size}")
    A = model.energy.a_block
    re_part = linalg.hermitian_part(A)
    im_part = linalg.skew_part(A)
    angles = 2.0 * math.pi * np.arange(int(grid_size)) / grid_size
    values = np.empty(len(angles))
    for lo in range(0, len(angles), chunk):
        th = angles[lo : lo + chunk]
        stack = np.cos(th)[:, None, None] * re_part + np.sin(th)[:, None, None] * im_part
        values[lo : lo + chunk] = linalg.hermitian_max_eigvals_batch(stack)
    return SupportFunction(angles, values, linalg.maxabs(A))


def nr_contains(support: SupportFunction, lam: complex, tol: float | None = None) -> bool:
    """True iff ``Re(e^{-iθ} λ) <= s(θ) + tol`` on every grid angle."""
    if tol is None:
        tol = support.default_tol()
    proj = (np.exp(-1j * support.angles) * complex(lam)).real
    return bool(np.all(proj <= support.values + tol))


def nr_contains_many(support: SupportFunction, lams, tol: float | None = None) -> np.ndarray:
    """Vectorized :func:`nr_contains` over an array of points."""
    if tol is None:
        tol = support.default_tol()
    lams = np.asarray(lams, dtype=complex).reshape(-1)
    proj = (np.exp(-1j * support.angles)[None, :] * lams[:, None]).real
    return np.all(proj <= support.values[None, :] + tol, axis=1)


def nr_polygon(support: SupportFunction) -> np.ndarray:
    """Vertices of the outer polygon ``∩_θ {Re(e^{-iθ}w) ≤ s(θ)}`` (consecutive half-plane intersections)."""
    th = support.angles
    s = support.values
    th2 = np.roll(th, -1)
    s2 = np.roll(s, -1)
    det = np.sin(th2 - th)
    x = (s * np.sin(th2) - s2 * np.sin(th)) / det
    y = (s2 * np.cos(th) - s * np.cos(th2)) / det
    return x + 1j * y
