"""Finite-dimensional operator pairs ``(A0, D)`` for ``z'' + D z' + A0 z = 0``.

Three families are provided: the Galerkin compression of a damped pipe
carrying fluid (pinned ends, sine basis), a diagonal example whose damping
vanishes on every other coordinate, and user matrices read from JSON.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from . import linalg
from .errors import InvalidParameter, NonHermitianInput, NotAccretive, NotPositiveDefinite

ACCRETIVE_RTOL = 1e-12


@dataclass(frozen=True)
class ModelSource:
    """Provenance tag: ``kind`` is ``"pipe"``, ``"diag"`` or ``"custom"``."""

    kind: str
    params: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"kind": self.kind, **self.params}


@dataclass(frozen=True, eq=False)
class EnergyModel:
    """Energy-coordinate block matrix ``[[0, S], [-S, -D]]`` with ``S = A0^{1/2}``."""

    dim: int
    a_block: np.ndarray
    s: np.ndarray
    s_inv: np.ndarray


@dataclass(frozen=True, eq=False)
class ModelPair:
    """Hermitian positive definite stiffness ``a0_matrix`` and damping ``d_matrix``.

    Build instances with :func:`make_model` (validated) or the family
    constructors. Arrays are stored read-only.
    """

    a0_matrix: np.ndarray
    d_matrix: np.ndarray
    source: ModelSource = field(default_factory=lambda: ModelSource("custom"))

    @property
    def dim(self) -> int:
        return self.a0_matrix.shape[0]

    @cached_property
    def energy(self) -> EnergyModel:
        return to_energy(self)

    @cached_property
    def damping_hermitian(self) -> np.ndarray:
        """``(D + D^H)/2``."""
        return linalg.hermitian_part(self.d_matrix)

    @cached_property
    def damping_skew(self) -> np.ndarray:
        """``(D - D^H)/(2i)``."""
        return linalg.skew_part(self.d_matrix)

    @cached_property
    def has_hermitian_damping(self) -> bool:
        return linalg.maxabs(self.damping_skew) <= linalg.HERMITIAN_RTOL * linalg.maxabs(self.d_matrix)


def _frozen(M: np.ndarray) -> np.ndarray:
    M = np.array(M, dtype=complex)
    M.setflags(write=False)
    return M


def make_model(a0, d, source: ModelSource | None = None, check: bool = True) -> ModelPair:
    """Validate and wrap a matrix pair.

    Parameters
    ----------
    a0, d : array_like
        Square matrices of equal size.
    source : ModelSource, optional
        Provenance; defaults to ``custom``.
    check : bool
        Skip validation when false. Meant only for negative-control tests that
        need a deliberately broken model.

    Raises
    ------
    InvalidParameter
        Shape mismatch or non-finite entries.
    NonHermitianInput, NotPositiveDefinite
        ``a0`` is not Hermitian positive definite.
    NotAccretive
        ``λ_min((D + D^H)/2) < -1e-12·maxabs(D)``.
    """
    A0 = linalg.as_matrix(a0)
    D = linalg.as_matrix(d)
    if A0.shape != D.shape:
        raise InvalidParameter(f"a0 has shape {A0.shape} but d has shape {D.shape}")
    if check:
        if not linalg.is_hermitian(A0):
            raise NonHermitianInput("a0 must be Hermitian")
        A0 = linalg.hermitian_part(A0)
        low = linalg.hermitian_eig(A0).values[0]
        if not low > 0.0:
            raise NotPositiveDefinite(f"a0 smallest eigenvalue {low:.6g} is not positive")
        r_low = linalg.hermitian_eig(linalg.hermitian_part(D)).values[0]
        if r_low < -ACCRETIVE_RTOL * linalg.maxabs(D):
            raise NotAccretive(f"damping is not accretive: smallest eigenvalue of its Hermitian part is {r_low:.6g}")
    return ModelPair(_frozen(A0), _frozen(D), source or ModelSource("custom"))


def gyroscopic_matrix(n: int) -> np.ndarray:
    """Sine-basis matrix of ``d/dr`` on ``[0, 1]``: ``4jk/(j²-k²)`` for ``j+k`` odd, else 0."""
    j = np.arange(1, n + 1, dtype=float)
    J, K = np.meshgrid(j, j, indexing="ij")
    odd = (J + K) % 2 == 1
    G = np.zeros((n, n))
    G[odd] = 4.0 * J[odd] * K[odd] / (J[odd] ** 2 - K[odd] ** 2)
    return G


def build_pipe(E: float, C: float, K: float, n: int) -> ModelPair:
    """Galerkin compression of the pinned pipe onto ``√2 sin(jπr)``, ``j = 1..n``.

    ``A0 = diag(E j⁴ π⁴)`` and ``D = (C/E) A0 + K G`` with ``G`` from
    :func:`gyroscopic_matrix`. ``K = 0`` is accepted and gives Hermitian damping.
    """
    if not (E > 0 and C > 0 and K >= 0):
        raise InvalidParameter(f"need E > 0, C > 0, K >= 0; got E={E}, C={C}, K={K}")
    if int(n) != n or n < 1:
        raise InvalidParameter(f"need n >= 1, got {n}")
    n = int(n)
    j = np.arange(1, n + 1, dtype=float)
    a0 = np.diag(E * j**4 * math.pi**4)
    d = (C / E) * a0 + K * gyroscopic_matrix(n)
    return ModelPair(_frozen(a0), _frozen(d), ModelSource("pipe", {"E": E, "C": C, "K": K, "n": n}))


def build_diag_example(n: int) -> ModelPair:
    """``A0 = diag(1..n)``, ``D = diag((1 + (-1)^j) j)``: damping vanishes on odd indices."""
    if int(n) != n or n < 1:
        raise InvalidParameter(f"need n >= 1, got {n}")
    n = int(n)
    j = np.arange(1, n + 1, dtype=float)
    return ModelPair(
        _frozen(np.diag(j)),
        _frozen(np.diag((1 + (-1) ** j) * j)),
        ModelSource("diag", {"n": n}),
    )


def to_energy(model: ModelPair) -> EnergyModel:
    """Assemble ``[[0, S], [-S, -D]]``, the block matrix in energy coordinates."""
    S, S_inv = linalg.sqrt_pd_with_inverse(model.a0_matrix)
    n = model.dim
    block = np.zeros((2 * n, 2 * n), dtype=complex)
    block[:n, n:] = S
    block[n:, :n] = -S
    block[n:, n:] = -model.d_matrix
    for M in (block, S, S_inv):
        M.setflags(write=False)
    return EnergyModel(n, block, S, S_inv)


def companion(model: ModelPair) -> np.ndarray:
    """Plain first-order linearization ``[[0, I], [-A0, -D]]``."""
    n = model.dim
    L = np.zeros((2 * n, 2 * n), dtype=complex)
    L[:n, n:] = np.eye(n)
    L[n:, :n] = -model.a0_matrix
    L[n:, n:] = -model.d_matrix
    return L


def companion_inverse(model: ModelPair) -> np.ndarray:
    """Closed-form inverse ``[[-A0^{-1} D, -A0^{-1}], [I, 0]]`` of :func:`companion`."""
    n = model.dim
    a0_inv = linalg.hermitian_part(linalg.solve_pd(model.a0_matrix, np.eye(n)))
    B = np.zeros((2 * n, 2 * n), dtype=complex)
    B[:n, :n] = -linalg.solve_pd(model.a0_matrix, model.d_matrix)
    B[:n, n:] = -a0_inv
    B[n:, :n] = np.eye(n)
    return B


def inverse_check(model: ModelPair) -> float:
    """Max entrywise residual of ``L B - I`` for the closed-form inverse ``B``."""
    L = companion(model)
    B = companion_inverse(model)
    return float(np.max(np.abs(L @ B - np.eye(2 * model.dim))))


def load_custom(path: str | Path) -> ModelPair:
    """Read ``{"n": int, "a0": [[re, im], ...], "d": [[re, im], ...]}`` (row-major entries)."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidParameter(f"cannot read model file {path}: {exc}") from exc
    try:
        n = int(doc["n"])
        a0 = _parse_entries(doc["a0"], n, "a0")
        d = _parse_entries(doc["d"], n, "d")
    except (KeyError, TypeError) as exc:
        raise InvalidParameter(f"malformed model file {path}: {exc}") from exc
    return make_model(a0, d, ModelSource("custom", {"path": str(path), "n": n}))


def _parse_entries(entries, n: int, name: str) -> np.ndarray:
    if n < 1:
        raise InvalidParameter("n must be at least 1")
    arr = np.asarray(entries, dtype=float)
    if arr.shape != (n * n, 2):
        raise InvalidParameter(f"{name} needs {n * n} [re, im] pairs, got array of shape {arr.shape}")
    return (arr[:, 0] + 1j * arr[:, 1]).reshape(n, n)


def dump_custom(model: ModelPair) -> dict:
    """Inverse of :func:`load_custom` (as a JSON-ready dict)."""

    def flat(M):
        return [[float(z.real), float(z.imag)] for z in np.asarray(M).ravel()]

    return {"n": model.dim, "a0": flat(model.a0_matrix), "d": flat(model.d_matrix)}
