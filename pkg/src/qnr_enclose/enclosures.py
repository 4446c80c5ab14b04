"""Spectral enclosure regions and the scalar bound functions behind them.

Every region is symmetric about the real axis and is described as a graph
over ``t = |Re λ|``: a point ``λ = -t ± iy`` belongs to the region when ``t``
is not excluded and ``y <= h(t)``. ``h`` may be ``math.inf``.

Regions built here are intersections of individually valid bounds, so they
stay valid even when the constants do not satisfy the ordering assumptions
under which the piecewise description (:func:`sectorial_piecewise`) holds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .constants import INF, DampingConstants
from .errors import InsideGap, InvalidParameter

HALF_PLANE = "HalfPlane"
NR_PARABOLA = "NrParabola"
ACCRETIVE = "Accretive"
SECTORIAL = "SectorialCombined"
SELF_ADJOINT = "SelfAdjointCombined"
KINDS = (HALF_PLANE, NR_PARABOLA, ACCRETIVE, SECTORIAL, SELF_ADJOINT)

SELF_ADJOINT_K_TOL = 1e-10
CUBIC_IMAG_TOL = 1e-10


# ---------------------------------------------------------------------------
# scalar bounds
# ---------------------------------------------------------------------------


def k_mu(k: float, mu: float) -> float:
    """Slope of the sector bound: the nonnegative root of the biquadratic in ``k_μ``.

    ``k_μ² = a + sqrt(a² + k²)`` with ``a = 2/μ² + (k² - 1)/2``; satisfies
    ``k <= k_μ <= sqrt(k² + 4/μ²)``.
    """
    if not mu > 0:
        raise InvalidParameter(f"mu must be positive, got {mu}")
    if not (k >= 0 and math.isfinite(k)):
        raise InvalidParameter(f"k must be finite and nonnegative, got {k}")
    a = 2.0 / mu**2 + 0.5 * (k * k - 1.0)
    root = math.hypot(a, k)
    if a >= 0:
        return math.sqrt(a + root)
    # a + root = k²/(root - a) without cancellation or underflow of k²
    return k / math.sqrt(root - a)


def h_i(t: float, k: float, beta: float) -> float:
    """Growth bound ``k t / (1 - 2t/β)`` for ``t < β/2``, infinite beyond."""
    if not beta > 0:
        raise InvalidParameter(f"beta must be positive, got {beta}")
    if t >= 0.5 * beta:
        return INF
    return k * t / (1.0 - 2.0 * t / beta)


def h_ii(t: float, k: float, mu: float) -> float:
    """Sector bound ``k_μ t``."""
    return k_mu(k, mu) * t


def _depressed_cubic_real_roots(p: float, q: float) -> list[float]:
    """Real roots of ``x³ + p x + q`` (closed form, trigonometric branch when all are real)."""
    half_q = 0.5 * q
    third_p = p / 3.0
    disc = half_q * half_q + third_p**3
    if disc > 0:
        sq = math.sqrt(disc)
        # stable Cardano: pick the cube root argument with no cancellation
        u = np.cbrt(-half_q - math.copysign(sq, half_q))
        x = u - third_p / u if u != 0 else 0.0
        roots = [float(x)]
        # the complex pair -x/2 ± i·(√3/2)(u + p/(3u)) counts as real when nearly so
        if u != 0:
            im = 0.5 * math.sqrt(3.0) * abs(u + third_p / u)
            re = -0.5 * x
            if im <= CUBIC_IMAG_TOL * (1.0 + abs(re)):
                roots.append(re)
        return roots
    if p == 0:
        return [0.0]
    r = 2.0 * math.sqrt(-third_p)
    arg = (3.0 * q / (2.0 * p)) * math.sqrt(-3.0 / p)
    phi = math.acos(max(-1.0, min(1.0, arg))) / 3.0
    return [r * math.cos(phi - 2.0 * math.pi * j / 3.0) for j in range(3)]


def h_iii(t: float, k: float, delta: float) -> float:
    """Largest nonnegative root ``y`` of ``(y² + t²)(y - k t) = (2/δ) t y``.

    Closed-form cubic solution followed by Newton polishing.
    """
    if not delta > 0:
        raise InvalidParameter(f"delta must be positive, got {delta}")
    if not (k >= 0 and math.isfinite(k)):
        raise InvalidParameter(f"k must be finite and nonnegative, got {k}")
    if t < 0:
        raise InvalidParameter(f"t must be nonnegative, got {t}")
    if t == 0:
        return 0.0
    if k == 0:
        rad = 2.0 * t / delta - t * t
        return math.sqrt(rad) if rad > 0 else 0.0
    # monic cubic y³ + a y² + b y + c
    a = -k * t
    b = t * t - 2.0 * t / delta
    c = -k * t**3
    p = b - a * a / 3.0
    q = 2.0 * a**3 / 27.0 - a * b / 3.0 + c
    y = max(_depressed_cubic_real_roots(p, q)) - a / 3.0

    def cubic(y):
        return ((y + a) * y + b) * y + c

    for _ in range(4):
        slope = (3.0 * y + 2.0 * a) * y + b
        if slope <= 0:
            break
        step = cubic(y) / slope
        if not math.isfinite(step):
            break
        y_new = y - step
        if abs(cubic(y_new)) >= abs(cubic(y)):
            break
        y = y_new
    return max(y, k * t)


def interval_I0(beta: float, delta: float) -> tuple[float, float] | None:
    """Real spectral-free interval centred at ``β/2``; ``None`` when ``βδ <= 4``."""
    if not (beta > 0 and delta > 0):
        raise InvalidParameter(f"beta and delta must be positive, got {beta}, {delta}")
    if beta * delta <= 4.0:
        return None
    r = math.sqrt(1.0 - 4.0 / (beta * delta))
    return 0.5 * beta * (1.0 - r), 0.5 * beta * (1.0 + r)


def interval_I0mu(beta: float, delta: float, kmu: float) -> tuple[float, float] | None:
    """Wider interval where the accretive bound beats the sector bound; ``None`` when empty."""
    if not (beta > 0 and delta > 0 and kmu >= 0):
        raise InvalidParameter(f"need beta, delta > 0 and kmu >= 0, got {beta}, {delta}, {kmu}")
    if kmu * kmu <= 4.0 / (beta * delta) - 1.0:
        return None
    r = math.sqrt(1.0 - 4.0 / (beta * delta) / (kmu * kmu + 1.0))
    return 0.5 * beta * (1.0 - r), 0.5 * beta * (1.0 + r)


def _inside(t: float, interval: tuple[float, float] | None) -> bool:
    return interval is not None and interval[0] < t < interval[1]


def h_0(t: float, beta: float, delta: float) -> float:
    """Accretive bound ``sqrt((β/δ) t/(β - t) - t²)`` for ``t < β``, infinite for ``t >= β``.

    Raises
    ------
    InsideGap
        When ``t`` lies in :func:`interval_I0`, where no point is admissible.
    """
    gap = interval_I0(beta, delta)
    if t >= beta:
        return INF
    if _inside(t, gap):
        raise InsideGap(f"t = {t} lies in the spectral-free interval {gap}")
    rad = (beta / delta) * t / (beta - t) - t * t
    return math.sqrt(rad) if rad > 0 else 0.0


def lambdas(constants: DampingConstants) -> tuple[float, float]:
    """Abscissae where the optimal bound switches from ``h_i`` to ``h_ii`` and from ``h_ii`` to ``h_iii``.

    ``λ_{i,ii} = (β/2)(1 - k/k_μ)`` and ``λ_{ii,iii} = (μ²/(2δ))(1 + k/k_μ)``;
    ``k/k_μ`` is read as 0 when both vanish, which makes ``λ_{ii,iii}`` infinite.
    """
    c = constants
    if not c.mu > 0:
        raise InvalidParameter("mu must be positive")
    if not c.delta > 0:
        raise InvalidParameter("delta must be positive")
    km = k_mu(c.k, c.mu)
    ratio = c.k / km if km > 0 else 0.0
    lam_1 = 0.5 * c.beta * (1.0 - ratio)
    lam_2 = 0.5 * c.mu**2 / c.delta * (1.0 + ratio) if km > c.k else INF
    return lam_1, lam_2


# ---------------------------------------------------------------------------
# regions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EnclosureRegion:
    """A conjugation-symmetric region given by bounds on ``|Im λ|`` over ``t = |Re λ|``.

    Attributes
    ----------
    kind : str
        One of :data:`KINDS`.
    constants : DampingConstants
        Constants the region was built from.
    derived : dict
        Auxiliary scalars (``k_mu``, switching abscissae, intervals); absent
        entries do not apply to this kind.
    clauses : tuple of str
        Active constraints with the result that justifies each.
    label : str
        Free-form name used in reports.
    """

    kind: str
    constants: DampingConstants
    derived: dict = field(default_factory=dict)
    clauses: tuple[str, ...] = ()
    label: str = ""

    @property
    def closed_at_zero(self) -> bool:
        """Only the numerical-range parabola allows ``Re λ = 0``."""
        return self.kind == NR_PARABOLA

    @property
    def gaps(self) -> list[tuple[float, float]]:
        """Open ``t``-intervals excluded from the region."""
        gaps = []
        for key in ("I0",):
            if self.derived.get(key) is not None:
                gaps.append(tuple(self.derived[key]))
        return gaps

    @property
    def t_max(self) -> float:
        """Largest admissible ``t`` (``γ`` when the region uses it)."""
        return self.derived.get("t_max", INF)

    def excluded(self, t: float) -> bool:
        return t > self.t_max or any(a < t < b for a, b in self.gaps)

    def upper_bound(self, t: float) -> float:
        """``h(t)``: largest admissible ``|Im λ|`` at ``|Re λ| = t``; ``nan`` where ``t`` is excluded."""
        if t < 0:
            raise InvalidParameter("t must be nonnegative")
        if self.excluded(t):
            return math.nan
        return _BOUNDS[self.kind](self, t)

    def _nearest_allowed(self, t: float) -> float:
        if t > self.t_max:
            t = self.t_max
        for a, b in self.gaps:
            if a < t < b:
                t = a if t - a <= b - t else b
        return t

    def excess(self, lam: complex) -> float:
        """Signed distance-like violation: ``<= 0`` inside, ``> 0`` outside (closed form).

        Combines ``Re λ``, how deep ``t`` sits in an excluded set and
        ``|Im λ| - h(t)``.
        """
        lam = complex(lam)
        x, y = lam.real, abs(lam.imag)
        if self.kind == HALF_PLANE:
            return x
        t = max(-x, 0.0)
        t_ok = self._nearest_allowed(t)
        depth = abs(t - t_ok) if t_ok != t else -INF
        h = _BOUNDS[self.kind](self, t_ok)
        vertical = y - h if math.isfinite(h) else -INF
        return max(x, depth, vertical)

    def membership(self, lam: complex, tol: float = 0.0) -> bool:
        """Membership with every comparison relaxed by ``tol`` (``Re λ < 0`` becomes ``Re λ < tol``)."""
        lam = complex(lam)
        if self.kind == HALF_PLANE:
            return lam.real <= tol and lam != 0
        if self.closed_at_zero:
            if lam.real > tol:
                return False
        elif not lam.real < tol:
            return False
        return self.excess(lam) <= tol

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "label": self.label,
            "constants": self.constants.to_dict(),
            "derived": {k: (list(v) if isinstance(v, tuple) else v) for k, v in self.derived.items()},
            "clauses": list(self.clauses),
        }


def _half_plane_bound(region, t):
    return INF


def _nr_bound(region, t):
    c = region.constants
    return c.k * t + 2.0 * math.sqrt(t / c.delta)


def _accretive_bound(region, t):
    c = region.constants
    return h_0(t, c.beta, c.delta)


def _sectorial_bound(region, t):
    c = region.constants
    bounds = [h_i(t, c.k, c.beta)]
    if c.mu > 0:
        bounds.append(region.derived["k_mu"] * t)
    if c.delta > 0:
        bounds.append(h_iii(t, c.k, c.delta))
        if region.derived.get("strip", True):
            bounds.append(h_0(t, c.beta, c.delta))
    return min(bounds)


def _selfadjoint_bound(region, t):
    c = region.constants
    if t < 0.5 * c.beta:
        return 0.0
    if c.gamma != INF and t > 0.5 * c.gamma:
        return 0.0
    bounds = [INF]
    if c.mu >= 2.0:
        return 0.0
    if c.mu > 0:
        bounds.append(region.derived["sector_slope"] * t)
    if c.delta > 0:
        rad = 2.0 * t / c.delta - t * t
        bounds.append(math.sqrt(rad) if rad > 0 else 0.0)
    return min(bounds)


_BOUNDS = {
    HALF_PLANE: _half_plane_bound,
    NR_PARABOLA: _nr_bound,
    ACCRETIVE: _accretive_bound,
    SECTORIAL: _sectorial_bound,
    SELF_ADJOINT: _selfadjoint_bound,
}

_GAMMA_CLAUSE = "Re λ >= -γ: γ finite; a resolvent point left of -γ always exists for a matrix"


def _gamma_derived(c: DampingConstants) -> dict:
    return {"t_max": c.gamma} if c.gamma != INF else {}


def region_half_plane(constants: DampingConstants, label: str = "") -> EnclosureRegion:
    """Closed left half-plane without the origin."""
    return EnclosureRegion(HALF_PLANE, constants, {}, ("Re λ <= 0, λ != 0: accretive damping",), label or HALF_PLANE)


def region_nr_parabola(constants: DampingConstants, label: str = "") -> EnclosureRegion:
    """Parabola ``|Im λ| <= k|Re λ| + 2 sqrt(|Re λ|/δ)`` containing the numerical range."""
    c = constants
    if not (c.delta > 0 and math.isfinite(c.k)):
        raise InvalidParameter("parabola region needs delta > 0 and finite k")
    clauses = ["|Im λ| <= k t + 2 sqrt(t/δ): numerical range bound (δ > 0, finite k)"]
    if c.gamma != INF:
        clauses.append("Re λ >= -γ: numerical range bound")
    return EnclosureRegion(NR_PARABOLA, c, _gamma_derived(c), tuple(clauses), label or NR_PARABOLA)


def region_accretive(constants: DampingConstants, label: str = "") -> EnclosureRegion:
    """Uniformly accretive bound ``|Im λ| <= h_0(|Re λ|)`` with the strip ``I_0`` removed."""
    c = constants
    if not c.delta > 0:
        raise InvalidParameter("accretive region needs delta > 0")
    derived = {"I0": interval_I0(c.beta, c.delta), **_gamma_derived(c)}
    clauses = ["|Im λ| <= h_0(t), t not in I_0: accretive QNR bound (δ > 0)"]
    if c.gamma != INF:
        clauses.append(_GAMMA_CLAUSE)
    return EnclosureRegion(ACCRETIVE, c, derived, tuple(clauses), label or ACCRETIVE)


def region_sectorial(constants: DampingConstants, label: str = "", strip: bool = True) -> EnclosureRegion:
    """Intersection of the sectorial bounds ``h_i``, ``h_ii``, ``h_iii`` and the accretive bound ``h_0``.

    Pieces are dropped when their constant vanishes: ``μ = 0`` removes
    ``h_ii``, ``δ = 0`` removes ``h_iii``, ``h_0`` and the strip.
    ``strip=False`` omits ``h_0`` and ``I_0`` (sectorial bounds alone).
    """
    c = constants
    if not c.beta > 0:
        raise InvalidParameter("sectorial region needs beta > 0")
    if not math.isfinite(c.k):
        raise InvalidParameter("sectorial region needs a finite k")
    derived: dict = dict(_gamma_derived(c))
    clauses = ["|Im λ| <= h_i(t): sectorial bound (β > 0)"]
    if c.mu > 0:
        derived["k_mu"] = k_mu(c.k, c.mu)
        clauses.append("|Im λ| <= k_mu t: sectorial bound (μ > 0)")
    if c.delta > 0:
        derived.update(I0=interval_I0(c.beta, c.delta) if strip else None, strip=strip)
        if c.mu > 0:
            lam_1, lam_2 = lambdas(c)
            derived.update(
                lambda_i_ii=lam_1,
                lambda_ii_iii=lam_2,
                I0mu=interval_I0mu(c.beta, c.delta, derived["k_mu"]) if strip else None,
            )
        clauses.append("|Im λ| <= h_iii(t): sectorial bound (δ > 0)")
        if strip:
            clauses.append("|Im λ| <= h_0(t), t not in I_0: accretive QNR bound (δ > 0)")
    elif c.mu > 0:
        derived["lambda_i_ii"] = 0.5 * c.beta * (1.0 - (c.k / derived["k_mu"] if derived["k_mu"] > 0 else 0.0))
    if c.gamma != INF:
        clauses.append(_GAMMA_CLAUSE)
    return EnclosureRegion(SECTORIAL, c, derived, tuple(clauses), label or SECTORIAL)


def region_selfadjoint(constants: DampingConstants, label: str = "") -> EnclosureRegion:
    """Region for Hermitian damping: real segment near 0, sector and disk for nonreal points, real strip gap."""
    c = constants
    if c.k > SELF_ADJOINT_K_TOL:
        raise InvalidParameter(f"self-adjoint region needs k = 0, got k = {c.k}")
    derived: dict = dict(_gamma_derived(c))
    clauses = ["nonreal λ have Re λ <= -β/2: Hermitian damping"]
    if 0 < c.mu < 2:
        derived["sector_slope"] = math.sqrt(4.0 - c.mu**2) / c.mu
        clauses.append("|Im λ| <= sqrt(4-μ²)/μ t: Hermitian damping (0 < μ < 2)")
    elif c.mu >= 2:
        clauses.append("spectrum real: Hermitian damping (μ >= 2)")
    if c.delta > 0:
        derived["I0"] = interval_I0(c.beta, c.delta) if c.beta > 0 else None
        clauses.append("|λ + 1/δ| <= 1/δ for nonreal λ: Hermitian damping (δ > 0)")
        if derived["I0"] is not None:
            clauses.append("t not in I_0: Hermitian damping (βδ > 4)")
    if c.gamma != INF:
        clauses.append("nonreal λ have Re λ >= -γ/2, all λ have Re λ >= -γ: Hermitian damping (γ finite)")
    return EnclosureRegion(SELF_ADJOINT, c, derived, tuple(clauses), label or SELF_ADJOINT)


def applicable_regions(constants: DampingConstants, hermitian_damping: bool, prefix: str = "") -> list[EnclosureRegion]:
    """Every region whose preconditions hold for ``constants``."""
    c = constants
    out = [region_half_plane(c, prefix + HALF_PLANE)]
    if c.delta > 0 and math.isfinite(c.k):
        out.append(region_nr_parabola(c, prefix + NR_PARABOLA))
    if c.delta > 0:
        out.append(region_accretive(c, prefix + ACCRETIVE))
    if c.beta > 0 and math.isfinite(c.k):
        out.append(region_sectorial(c, prefix + SECTORIAL))
    if hermitian_damping and c.k <= SELF_ADJOINT_K_TOL:
        out.append(region_selfadjoint(c, prefix + SELF_ADJOINT))
    return out


# ---------------------------------------------------------------------------
# piecewise description and boundary sampling
# ---------------------------------------------------------------------------


def sectorial_piecewise(constants: DampingConstants, t: float) -> float:
    """Piecewise sectorial bound: ``h_i`` up to ``λ_{i,ii}``, then ``h_ii``, ``h_0`` on ``I_{0,μ}``, ``h_iii`` from ``λ_{ii,iii}``.

    Valid description of :func:`region_sectorial` for constants with
    ``μ² >= βδ``. Returns ``nan`` inside ``I_0``, intervals are half-open with
    endpoints assigned to the left piece.
    """
    c = constants
    if not c.mu > 0:
        return h_i(t, c.k, c.beta)
    km = k_mu(c.k, c.mu)
    if c.delta <= 0:
        lam_1 = 0.5 * c.beta * (1.0 - (c.k / km if km > 0 else 0.0))
        return h_i(t, c.k, c.beta) if t <= lam_1 else km * t
    lam_1, lam_2 = lambdas(c)
    gap = interval_I0(c.beta, c.delta)
    wide = interval_I0mu(c.beta, c.delta, km)
    if _inside(t, gap):
        return math.nan
    if t <= lam_1:
        return h_i(t, c.k, c.beta)
    if _inside(t, wide):
        return h_0(t, c.beta, c.delta)
    if t < lam_2:
        return km * t
    return h_iii(t, c.k, c.delta)


def _breakpoints(region: EnclosureRegion) -> list[float]:
    c = region.constants
    pts = [0.5 * c.beta, c.beta]
    if c.gamma != INF:
        pts += [c.gamma, 0.5 * c.gamma]
    if c.delta > 0:
        pts += [2.0 / c.delta, c.mu**2 / (2.0 * c.delta)]
    for key in ("lambda_i_ii", "lambda_ii_iii"):
        if key in region.derived:
            pts.append(region.derived[key])
    for key in ("I0", "I0mu"):
        if region.derived.get(key) is not None:
            pts += list(region.derived[key])
    return [p for p in pts if math.isfinite(p) and p > 0]


def region_boundary(region: EnclosureRegion, samples: int = 512, cap: float | None = None, height: float | None = None) -> list[np.ndarray]:
    """Upper boundary of the region as polylines of complex points ``-t + i·h(t)``.

    Parameters
    ----------
    samples : int
        Number of ``t`` abscissae on ``[0, cap]`` (breakpoints are added).
    cap : float, optional
        Plot limit for ``|Re λ|``; ``γ`` when finite, else ``4·β`` or 10.
    height : float, optional
        Clip level for infinite or very large ``h``; defaults to ``cap``.

    Returns
    -------
    list of ndarray
        One polyline per connected piece, ordered by increasing ``t``; the
        lower half is the complex conjugate.
    """
    if int(samples) != samples or samples < 16:
        raise InvalidParameter("samples must be an integer >= 16")
    c = region.constants
    if cap is None:
        cap = c.gamma if c.gamma != INF else (4.0 * c.beta if c.beta > 0 else 10.0)
    if not cap > 0:
        raise InvalidParameter("cap must be positive")
    if height is None:
        height = cap
    ts = np.linspace(0.0, cap, int(samples))
    extra = [p for p in _breakpoints(region) if p < cap]
    ts = np.unique(np.concatenate([ts, extra]))
    lines, current = [], []
    for t in ts:
        if region.excluded(t):
            if current:
                lines.append(np.array(current))
                current = []
            continue
        h = region.upper_bound(t)
        current.append(complex(-t, min(h, height)))
    if current:
        lines.append(np.array(current))
    return lines
