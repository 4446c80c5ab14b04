"""Quadratic eigenvalue problem solution and enclosure verification."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .constants import DampingConstants
from .enclosures import EnclosureRegion, applicable_regions
from .errors import QnrEncloseError
from .model import ModelPair, companion, companion_inverse, inverse_check
from .ranges import qnr_roots

TOL_RTOL = 1e-6
TOL_FLOOR = 1e-12
GAP_SHRINK = 1e-9
DEBUG_MATCH_RTOL = 1e-8


class LinearizationMismatch(QnrEncloseError):
    """Energy-block and companion eigenvalues disagree (debug cross-check)."""


@dataclass
class RegionVerdict:
    """Membership outcome of all eigenvalues against one region.

    ``margin`` is the largest :meth:`EnclosureRegion.excess`; negative means
    every eigenvalue lies strictly inside.
    """

    label: str
    kind: str
    passed: bool
    violations: list[int]
    worst_index: int | None
    worst_eigenvalue: complex | None
    margin: float
    tol: float
    region: dict = field(default_factory=dict)


@dataclass
class GapFinding:
    """Whether any ``|Re λ|`` falls strictly inside ``interval``.

    ``guaranteed`` marks strips the theory proves spectrum-free; other
    intervals are recorded for information only.
    """

    label: str
    interval: tuple[float, float] | None
    clean: bool
    offenders: list[int]
    guaranteed: bool


@dataclass
class SpectrumReport:
    eigenvalues: np.ndarray
    residuals: np.ndarray | None = None
    verdicts: list[RegionVerdict] = field(default_factory=list)
    gap_findings: list[GapFinding] = field(default_factory=list)
    scale: float = 1.0
    source: dict = field(default_factory=dict)
    constants: dict = field(default_factory=dict)
    checks: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        """All verdicts pass, all guaranteed strips are clean and all boolean checks hold."""
        return (
            all(v.passed for v in self.verdicts)
            and all(g.clean for g in self.gap_findings if g.guaranteed)
            and all(v for v in self.checks.values() if isinstance(v, bool))
        )

    def default_tol(self) -> float:
        return max(TOL_RTOL * self.scale, TOL_FLOOR)


def match_multisets(a, b) -> float:
    """Greedy matching of two equal-size point sets; largest relative deviation ``|x - y| / max(|x|, tiny)``."""
    a = np.asarray(a, dtype=complex)
    b = list(np.asarray(b, dtype=complex))
    if len(a) != len(b):
        return math.inf
    worst = 0.0
    for x in a[np.argsort(-np.abs(a))]:
        j = int(np.argmin([abs(x - y) for y in b]))
        worst = max(worst, abs(x - b[j]) / max(abs(x), np.finfo(float).tiny))
        b.pop(j)
    return worst


def _spectral_norm(M: np.ndarray) -> float:
    gram = M.conj().T @ M
    return math.sqrt(max(float(linalg.hermitian_max_eigvals_batch(linalg.hermitian_part(gram)[None])[0]), 0.0))


def solve_qep(model: ModelPair, vectors: bool = False, debug: bool = False) -> SpectrumReport:
    """Eigenvalues of ``λ² + λD + A0`` via the energy-coordinate block matrix.

    Parameters
    ----------
    vectors : bool
        Also compute eigenvectors and the normwise backward error
        ``‖(λ² + λD + A0) z‖ / ((|λ|² + |λ|‖D‖ + ‖A0‖) ‖z‖)`` of each eigenpair.
    debug : bool
        Cross-check against the companion linearization; raises
        :class:`LinearizationMismatch` beyond ``1e-8`` relative deviation.
    """
    A = model.energy.a_block
    eig = linalg.general_eig(A, vectors=vectors)
    report = SpectrumReport(
        eigenvalues=eig.values,
        scale=linalg.maxabs(A),
        source=model.source.to_dict(),
    )
    if vectors:
        n = model.dim
        Z = model.energy.s_inv @ eig.vectors[:n]
        na = _spectral_norm(model.a0_matrix)
        nd = _spectral_norm(model.d_matrix)
        res = np.empty(len(eig.values))
        for j, lam in enumerate(eig.values):
            z = Z[:, j]
            r = lam * lam * z + lam * (model.d_matrix @ z) + model.a0_matrix @ z
            res[j] = np.linalg.norm(r) / ((abs(lam) ** 2 + abs(lam) * nd + na) * np.linalg.norm(z))
        report.residuals = res
        report.checks["eigenvectors"] = eig.vectors
    if debug:
        other = linalg.general_eig(companion(model)).values
        dev = match_multisets(eig.values, other)
        report.checks["companion_max_rel_diff"] = dev
        if not dev <= DEBUG_MATCH_RTOL:
            raise LinearizationMismatch(f"companion eigenvalues deviate by {dev:.3e} relative")
    return report


def verify_enclosures(
    model: ModelPair,
    constants: DampingConstants | None = None,
    regions: list[EnclosureRegion] | None = None,
    tol: float | None = None,
    report: SpectrumReport | None = None,
    label: str = "",
) -> SpectrumReport:
    """Check every eigenvalue against every region, appending verdicts to the report.

    Regions default to all applicable for ``constants``. ``tol`` defaults to
    ``1e-6 · maxabs(Ã)`` with a floor of ``1e-12``. Violations are returned as
    data; nothing is raised.
    """
    if report is None:
        report = solve_qep(model)
    if regions is None:
        if constants is None:
            raise ValueError("pass constants or regions")
        regions = applicable_regions(constants, model.has_hermitian_damping, prefix=label)
    if constants is not None:
        report.constants[label or "constants"] = constants.to_dict()
    if tol is None:
        tol = report.default_tol()
    lams = report.eigenvalues
    for region in regions:
        excess = np.array([region.excess(lam) for lam in lams])
        inside = np.array([region.membership(lam, tol) for lam in lams])
        bad = [int(i) for i in np.flatnonzero(~inside)]
        worst = int(np.argmax(excess)) if len(excess) else None
        report.verdicts.append(
            RegionVerdict(
                label=region.label,
                kind=region.kind,
                passed=not bad,
                violations=bad,
                worst_index=worst,
                worst_eigenvalue=complex(lams[worst]) if worst is not None else None,
                margin=float(excess[worst]) if worst is not None else -math.inf,
                tol=tol,
                region=region.to_dict(),
            )
        )
        for key, guaranteed in (("I0", True), ("I0mu", False)):
            if key in region.derived:
                interval = region.derived[key]
                offenders = gap_offenders(report, interval)
                report.gap_findings.append(
                    GapFinding(f"{region.label}:{key}", interval, not offenders, offenders, guaranteed)
                )
    return report


def gap_offenders(report: SpectrumReport, interval: tuple[float, float] | None) -> list[int]:
    """Indices of eigenvalues with ``|Re λ|`` strictly inside the interval shrunk by ``1e-9`` of its right end."""
    if interval is None:
        return []
    a, b = interval
    s = GAP_SHRINK * max(abs(b), abs(a))
    t = np.abs(np.asarray(report.eigenvalues).real)
    return [int(i) for i in np.flatnonzero((t > a + s) & (t < b - s))]


def gap_check(report: SpectrumReport, interval: tuple[float, float] | None) -> bool:
    """True iff no eigenvalue has ``|Re λ|`` inside the (slightly shrunk) open interval."""
    return not gap_offenders(report, interval)


def symmetry_check(report_or_values, tol: float) -> bool:
    """True iff the eigenvalues are closed under conjugation under greedy matching within ``tol``."""
    if isinstance(report_or_values, SpectrumReport):
        values = report_or_values.eigenvalues
    else:
        values = report_or_values
    left = list(np.asarray(values, dtype=complex).reshape(-1))
    left.sort(key=lambda z: -z.imag)
    while left:
        z = left.pop(0)
        if abs(z.imag) <= 0.5 * tol:
            continue
        target = z.conjugate()
        if not left:
            return False
        dist = [abs(w - target) for w in left]
        j = int(np.argmin(dist))
        if dist[j] > tol:
            return False
        left.pop(j)
    return True


def structural_checks(model: ModelPair, report: SpectrumReport, constants: DampingConstants | None = None) -> dict:
    """Structural spectrum properties of a finite model.

    Always checked: eigenvalue count, closed left half-plane, nonzero spectrum
    against ``1/‖B‖₂`` and the inverse-formula residual. With ``constants``:
    strict negativity when ``β > 0`` and the resolvent-point hypothesis
    ``min Re λ >= -γ``. With Hermitian damping: conjugate symmetry and the
    two-component split (real in ``[-β/2, 0)`` or ``Re λ <= -β/2``).
    """
    lams = np.asarray(report.eigenvalues)
    scale = report.scale
    B = companion_inverse(model)
    inv_norm = _spectral_norm(B)
    L = companion(model)
    residual = inverse_check(model)
    out = {
        "count_ok": len(lams) == 2 * model.dim,
        "left_half_plane": bool(np.all(lams.real <= 1e-9 * scale)),
        "max_real_part": float(np.max(lams.real)),
        "nonzero": bool(np.min(np.abs(lams)) >= (1.0 - 1e-6) / inv_norm),
        "min_modulus": float(np.min(np.abs(lams))),
        "inverse_residual": residual,
        "inverse_residual_ok": residual <= 1e-10 * linalg.maxabs(L) * linalg.maxabs(B),
    }
    if constants is not None:
        if constants.beta > 0:
            out["strictly_negative"] = bool(np.all(lams.real <= -1e-8 * scale))
        if constants.gamma != math.inf:
            # Recorded, not required: its failure only voids the γ clauses.
            out["resolvent_left_of_gamma"] = float(np.min(lams.real)) >= -constants.gamma * (1 + 1e-9)
    if model.has_hermitian_damping:
        out["conjugate_symmetric"] = symmetry_check(lams, 1e-8 * scale)
        if constants is not None and constants.beta > 0:
            half = 0.5 * constants.beta
            slack = 1e-9 * scale
            real = np.abs(lams.imag) <= 1e-8 * scale
            near = real & (lams.real >= -half - slack)
            far = lams.real <= -half + slack
            out["hermitian_split"] = bool(np.all(near | far))
    return out


def qnr_witness_deviation(model: ModelPair, report: SpectrumReport | None = None) -> np.ndarray:
    """For each eigenpair ``(u, w)`` of the block matrix, relative distance of ``λ`` to the roots of ``(S^{-1}u, w)``.

    Demonstrates that every eigenvalue is a point of the quadratic numerical range.
    """
    if report is None or "eigenvectors" not in report.checks:
        report = solve_qep(model, vectors=True)
    V = report.checks["eigenvectors"]
    n = model.dim
    out = np.empty(len(report.eigenvalues))
    for j, lam in enumerate(report.eigenvalues):
        f = model.energy.s_inv @ V[:n, j]
        g = V[n:, j]
        r1, r2 = qnr_roots(model, f, g)
        out[j] = min(abs(r1 - lam), abs(r2 - lam)) / abs(lam)
    return out


def galerkin_stability(build, sizes=(8, 16, 32, 64), count: int = 6, rtol: float = 1e-6) -> dict:
    """Track the ``count`` smallest-modulus eigenvalues across truncation sizes.

    ``build(n)`` returns a model. For each consecutive pair of sizes the largest
    relative change of the tracked eigenvalues is reported; eigenvalues that
    move more than ``rtol`` between the two largest sizes are flagged. Nothing
    is claimed about the continuum spectrum.
    """
    tracked = {}
    for n in sizes:
        lams = solve_qep(build(n)).eigenvalues
        lams = lams[np.lexsort((lams.imag, np.abs(lams)))]
        tracked[n] = lams[: min(count, len(lams))]
    changes = {}
    for a, b in zip(sizes, sizes[1:]):
        m = min(len(tracked[a]), len(tracked[b]))
        changes[(a, b)] = float(np.max(np.abs(tracked[b][:m] - tracked[a][:m]) / np.abs(tracked[b][:m])))
    last, prev = sizes[-1], sizes[-2]
    m = min(len(tracked[last]), len(tracked[prev]))
    moving = np.abs(tracked[last][:m] - tracked[prev][:m]) / np.abs(tracked[last][:m]) > rtol
    return {"tracked": tracked, "changes": changes, "unstable": [int(i) for i in np.flatnonzero(moving)]}
