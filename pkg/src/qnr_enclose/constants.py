"""Damping constants of an operator pair.

For ``R = (D + D^H)/2`` and ``S = A0^{1/2}``:

* ``beta``  = min z*Rz / ‖z‖²,          ``gamma`` = max z*Rz / ‖z‖²
* ``delta`` = min z*Rz / ‖Sz‖²,         ``mu``    = min z*Rz / (‖z‖ ‖Sz‖)
* ``a0``    = min ‖Sz‖ / ‖z‖,           ``k``     = max |z*Nz| / z*Rz  with ``N = (D - D^H)/(2i)``

``math.inf`` is used as the explicit marker for an infinite ``gamma`` or ``k``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from . import linalg
from .errors import InvalidParameter
from .model import ModelPair

INF = math.inf
BETA_POSITIVE_RTOL = 1e-10
CHAIN_RTOL = 1e-9
MU_RANDOM_STARTS = 32
MU_TOL = 1e-11
MU_MAX_ITER = 200


@dataclass(frozen=True)
class DampingConstants:
    """Scalars parameterizing every enclosure region.

    ``gamma`` and ``k`` may be ``math.inf``; all fields are nonnegative.
    """

    beta: float
    gamma: float
    delta: float
    mu: float
    a0: float
    k: float

    def __post_init__(self):
        for name, value in asdict(self).items():
            if math.isnan(value) or value < 0:
                raise InvalidParameter(f"{name} must be nonnegative, got {value}")

    def chain_margins(self) -> dict[str, float]:
        """Signed slack of ``μ² ≥ βδ``, ``γ ≥ β``, ``β ≥ a0 μ`` and ``μ ≥ a0 δ``."""
        return {
            "mu_sq_minus_beta_delta": self.mu**2 - self.beta * self.delta,
            "gamma_minus_beta": self.gamma - self.beta,
            "beta_minus_a0_mu": self.beta - self.a0 * self.mu,
            "mu_minus_a0_delta": self.mu - self.a0 * self.delta,
        }

    def chain_holds(self, rtol: float = CHAIN_RTOL) -> bool:
        """All four inequalities, each with slack ``rtol`` relative to its larger side."""
        sides = [
            (self.mu**2, self.beta * self.delta),
            (self.gamma, self.beta),
            (self.beta, self.a0 * self.mu),
            (self.mu, self.a0 * self.delta),
        ]
        for big, small in sides:
            if big == INF:
                continue
            if big - small < -rtol * max(abs(big), abs(small)):
                return False
        return True

    def dominates(self, other: "DampingConstants", rtol: float = 1e-9) -> bool:
        """True when these constants are admissible wherever ``other`` is.

        Larger ``beta``, ``delta``, ``mu`` and smaller ``gamma``, ``k`` describe
        stronger damping, hence smaller regions.
        """
        ge = lambda a, b: a >= b - rtol * max(abs(b), 1.0)  # noqa: E731
        return (
            ge(self.beta, other.beta)
            and ge(self.delta, other.delta)
            and ge(self.mu, other.mu)
            and ge(other.gamma, self.gamma)
            and ge(other.k, self.k)
        )

    def to_dict(self) -> dict[str, float]:
        return asdict(self)


def _beta_is_positive(beta: float, d_scale: float) -> bool:
    return beta > BETA_POSITIVE_RTOL * d_scale


def mu_objective(z: np.ndarray, R: np.ndarray, A0: np.ndarray) -> float:
    """``Re(z*Rz) / sqrt(z*z · z*A0 z)``."""
    r = float(np.vdot(z, R @ z).real)
    a = float(np.vdot(z, z).real)
    b = float(np.vdot(z, A0 @ z).real)
    return r / math.sqrt(a * b)


def _descend(z: np.ndarray, R: np.ndarray, A0: np.ndarray, max_iter: int, tol: float) -> tuple[float, np.ndarray]:
    """Riemannian gradient descent on the unit sphere with Armijo backtracking.

    The objective is invariant under complex scaling of ``z``, so its gradient
    is tangent to the sphere and geodesic steps ``cos τ z + sin τ d`` suffice.
    """
    z = z / np.linalg.norm(z)

    def evaluate(z):
        Rz = R @ z
        Az = A0 @ z
        r = float(np.vdot(z, Rz).real)
        b = float(np.vdot(z, Az).real)
        return r / math.sqrt(b), Rz, Az, b

    f, Rz, Az, b = evaluate(z)
    tau = 0.25
    for _ in range(max_iter):
        grad = 2.0 * Rz / math.sqrt(b) - f * z - f * Az / b
        grad -= z * np.vdot(z, grad)
        gnorm = float(np.linalg.norm(grad))
        if gnorm == 0.0:
            break
        d = -grad / gnorm
        tau = min(2.0 * tau, math.pi / 4)
        while True:
            trial = math.cos(tau) * z + math.sin(tau) * d
            trial /= np.linalg.norm(trial)
            f_new, Rz_new, Az_new, b_new = evaluate(trial)
            if f_new <= f - 1e-4 * tau * gnorm or tau < 1e-14:
                break
            tau *= 0.5
        if f_new >= f:
            break
        gain = f - f_new
        z, f, Rz, Az, b = trial, f_new, Rz_new, Az_new, b_new
        if gain <= tol * max(abs(f), np.finfo(float).tiny):
            break
    return f, z


def mu_dual_bound(R: np.ndarray, A0: np.ndarray, a0_eigs: np.ndarray) -> tuple[float, np.ndarray]:
    """Lower bound ``max_t 2 λ_min(R; t I + A0/t)`` for ``mu`` and the minimizing vector at the best ``t``.

    Follows from ``‖z‖ ‖Sz‖ ≤ (t ‖z‖² + ‖Sz‖²/t)/2`` for every ``t > 0``; only
    ``t`` between the extreme singular values of ``S`` can be optimal.
    """
    n = R.shape[0]
    eye = np.eye(n)
    lo = 0.5 * math.log(a0_eigs[0])
    hi = 0.5 * math.log(a0_eigs[-1])

    def neg_phi(log_t: float) -> float:
        t = math.exp(log_t)
        return -2.0 * float(linalg.pencil_eig(R, t * eye + A0 / t).values[0])

    if hi - lo < 1e-12:
        best = lo
    else:
        grid = np.linspace(lo, hi, 17)
        vals = [neg_phi(x) for x in grid]
        i = int(np.argmin(vals))
        left, right = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
        res = minimize_scalar(neg_phi, bounds=(left, right), method="bounded", options={"xatol": 1e-10})
        best = res.x if res.fun <= vals[i] else grid[i]
    t = math.exp(best)
    eig = linalg.pencil_eig(R, t * eye + A0 / t, vectors=True)
    return 2.0 * float(eig.values[0]), eig.vectors[:, 0]


def mu_bounds(
    model: ModelPair,
    seed: int = 0,
    random_starts: int = MU_RANDOM_STARTS,
    max_iter: int = MU_MAX_ITER,
) -> tuple[float, float, np.ndarray]:
    """Bracket ``mu`` from below (dual bound) and above (best multi-start local minimum).

    Returns
    -------
    lower, upper : float
    argmin : ndarray
        Unit vector attaining ``upper``.
    """
    R = model.damping_hermitian
    A0 = model.a0_matrix
    n = model.dim
    r_eig = linalg.hermitian_eig(R, vectors=True)
    a_eig = linalg.hermitian_eig(A0, vectors=True)
    lower, dual_vec = mu_dual_bound(R, A0, a_eig.values)

    rng = np.random.default_rng(seed)
    starts = [r_eig.vectors[:, j] for j in range(n)]
    starts += [a_eig.vectors[:, j] for j in range(n)]
    starts.append(dual_vec)
    noise = rng.standard_normal((random_starts, n)) + 1j * rng.standard_normal((random_starts, n))
    starts += list(noise)

    best_f, best_z = INF, starts[0]
    for z0 in starts:
        f, z = _descend(np.asarray(z0, dtype=complex), R, A0, max_iter, MU_TOL)
        if f < best_f:
            best_f, best_z = f, z
    return lower, best_f, best_z


def compute_constants(model: ModelPair, seed: int = 0) -> DampingConstants:
    """Constants of the finite-dimensional pair (exact eigenvalue quantities, ``mu`` by local search).

    ``k`` is the optimal sectoriality constant ``max |z*Nz| / z*Rz``; it is
    ``math.inf`` when ``R`` is singular (``beta <= 1e-10 maxabs(D)``) but the
    skew part ``N`` does not vanish, and 0 when ``N`` vanishes. A singular
    ``R`` also sets ``delta`` and ``mu`` to 0, removing rounding noise.
    """
    R = model.damping_hermitian
    N = model.damping_skew
    d_scale = linalg.maxabs(model.d_matrix)
    r_vals = linalg.hermitian_eig(R).values
    a_vals = linalg.hermitian_eig(model.a0_matrix).values
    beta, gamma = float(r_vals[0]), float(r_vals[-1])
    S_inv = model.energy.s_inv
    delta = float(linalg.hermitian_eig(linalg.hermitian_part(S_inv @ R @ S_inv)).values[0])
    _, mu, _ = mu_bounds(model, seed=seed)
    if not _beta_is_positive(beta, d_scale):
        # beta >= a0 mu >= a0^2 delta: all three vanish together.
        beta = delta = mu = 0.0
    if model.has_hermitian_damping:
        k = 0.0
    elif beta > 0.0:
        k = linalg.pencil_max_abs(N, R)
    else:
        k = INF
    return DampingConstants(
        beta=beta,
        gamma=max(gamma, 0.0),
        delta=max(delta, 0.0),
        mu=max(mu, 0.0),
        a0=math.sqrt(float(a_vals[0])),
        k=k,
    )


def pipe_constants(E: float, C: float, K: float) -> DampingConstants:
    """Continuum constants of the pinned pipe: ``β = Cπ⁴``, ``δ = C/E``, ``μ = Cπ²/√E``, ``k = K/(Cπ³)``.

    ``gamma`` is infinite for the unbounded continuum damping.
    """
    if not (E > 0 and C > 0 and K >= 0):
        raise InvalidParameter(f"need E > 0, C > 0, K >= 0; got E={E}, C={C}, K={K}")
    pi = math.pi
    return DampingConstants(
        beta=C * pi**4,
        gamma=INF,
        delta=C / E,
        mu=C * pi**2 / math.sqrt(E),
        a0=math.sqrt(E) * pi**2,
        k=K / (C * pi**3),
    )


def stiffness_bound_margin(model: ModelPair, constants: DampingConstants) -> float:
    """Slack ``(γ/μ)² - λ_max(A0)``: bounded damping with ``μ > 0`` forces bounded stiffness.

    Returns ``math.inf`` when the hypothesis (``γ`` finite, ``μ > 0``) fails.
    """
    if constants.gamma == INF or constants.mu <= 0.0:
        return INF
    top = float(linalg.hermitian_eig(model.a0_matrix).values[-1])
    return (constants.gamma / constants.mu) ** 2 - top
