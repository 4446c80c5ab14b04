"""Command-line front end ``qnr-enclose``.

Exit codes: 0 success, 1 a theory-guaranteed check failed, 2 invalid input,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from . import enclosures as enc
from . import io
from .constants import DampingConstants, compute_constants, pipe_constants, stiffness_bound_margin
from .errors import DidNotConverge, InvalidParameter, QnrEncloseError
from .model import ModelPair, build_diag_example, build_pipe, load_custom
from .ranges import DEFAULT_GRID, STRATEGIES, nr_polygon, nr_support, sample_qnr
from .spectrum import (
    LinearizationMismatch,
    gap_check,
    solve_qep,
    structural_checks,
    symmetry_check,
    verify_enclosures,
)

COMMANDS = ("constants", "figure", "verify", "qnr", "spectrum", "region")
EXIT_OK, EXIT_VIOLATION, EXIT_INVALID, EXIT_NUMERIC = 0, 1, 2, 3
PLOT_CAP_FACTOR = 1.5


@dataclass
class RunConfig:
    command: str
    model: tuple | None
    n: int = 8
    out: Path = Path("qnr_out")
    seed: int = 42
    grid: int = DEFAULT_GRID
    samples: int = 10_000
    strategy: str = "random"
    tol: float = 1e-6
    figure: str | None = None
    boundary_samples: int = 512
    debug: bool = False


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qnr-enclose", description="Spectral enclosures for damped second-order systems.")
    p.add_argument("command", choices=COMMANDS)
    src = p.add_mutually_exclusive_group()
    src.add_argument("--pipe", nargs=3, type=float, metavar=("E", "C", "K"), help="pinned pipe model")
    src.add_argument("--diag", type=int, metavar="N", help="diagonal example of dimension N")
    src.add_argument("--custom", type=Path, metavar="PATH", help="JSON matrix file")
    p.add_argument("--n", type=int, default=8, help="pipe truncation size (default 8)")
    p.add_argument("--samples", type=int, default=10_000, help="QNR samples or boundary directions")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--tol", type=float, default=1e-6, help="membership tolerance relative to maxabs of the block matrix")
    p.add_argument("--out", type=Path, default=Path("qnr_out"), help="output directory")
    p.add_argument("--figure", help="figure id (see data/figures.json)")
    p.add_argument("--strategy", choices=STRATEGIES, default="random")
    p.add_argument("--grid", type=int, default=DEFAULT_GRID, help="support-function angles")
    p.add_argument("--boundary-samples", type=int, default=512)
    p.add_argument("--debug", action="store_true", help="cross-check against the companion linearization")
    return p


def config_from_args(args: argparse.Namespace) -> RunConfig:
    if args.pipe is not None:
        model = ("pipe", *args.pipe)
    elif args.diag is not None:
        model = ("diag", args.diag)
    elif args.custom is not None:
        model = ("custom", args.custom)
    else:
        model = None
    if model is None and args.command != "figure":
        raise InvalidParameter(f"{args.command} needs one of --pipe, --diag, --custom")
    if args.command == "figure" and args.figure is None:
        raise InvalidParameter("figure needs --figure ID")
    if args.samples < 1 or args.grid < 8 or args.n < 1:
        raise InvalidParameter("--samples must be >= 1, --grid >= 8, --n >= 1")
    if not args.tol >= 0:
        raise InvalidParameter("--tol must be nonnegative")
    return RunConfig(
        command=args.command,
        model=model,
        n=args.n,
        out=args.out,
        seed=args.seed,
        grid=args.grid,
        samples=args.samples,
        strategy=args.strategy,
        tol=args.tol,
        figure=args.figure,
        boundary_samples=args.boundary_samples,
        debug=args.debug,
    )


def load_model(config: RunConfig) -> ModelPair:
    kind = config.model[0]
    if kind == "pipe":
        _, E, C, K = config.model
        return build_pipe(E, C, K, config.n)
    if kind == "diag":
        return build_diag_example(config.model[1])
    return load_custom(config.model[1])


def analytic_constants(config: RunConfig) -> DampingConstants | None:
    if config.model and config.model[0] == "pipe":
        _, E, C, K = config.model
        return pipe_constants(E, C, K)
    return None


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_constants(config: RunConfig) -> int:
    model = load_model(config)
    computed = compute_constants(model, seed=config.seed)
    doc = {
        "source": model.source.to_dict(),
        "computed": computed.to_dict(),
        "computed_chain_margins": computed.chain_margins(),
        "computed_chain_holds": computed.chain_holds(),
        "stiffness_bound_margin": stiffness_bound_margin(model, computed),
    }
    analytic = analytic_constants(config)
    if analytic is not None:
        doc["analytic"] = analytic.to_dict()
        doc["analytic_chain_margins"] = analytic.chain_margins()
    warnings = []
    if computed.beta == 0.0:
        warnings.append("beta = 0: sectorial regions are unavailable")
    doc["warnings"] = warnings
    for w in warnings:
        print(f"warning: {w}", file=sys.stderr)
    io.write_json(config.out / "constants.json", doc)
    return EXIT_OK


def _figure_table() -> dict:
    text = resources.files("qnr_enclose").joinpath("data/figures.json").read_text(encoding="utf-8")
    return json.loads(text)


def figure_constants(entry: dict) -> DampingConstants:
    if "pipe" in entry:
        p = entry["pipe"]
        return pipe_constants(float(p["E"]), float(p["C"]), float(p["K"]))
    return DampingConstants(**{k: float(v) for k, v in entry["constants"].items()})


def figure_regions(entry: dict) -> tuple[enc.EnclosureRegion, enc.EnclosureRegion]:
    """QNR-based region of a figure and its numerical-range counterpart."""
    c = figure_constants(entry)
    if entry["kind"] == enc.SELF_ADJOINT:
        qnr = enc.region_selfadjoint(c)
    else:
        qnr = enc.region_sectorial(c, strip=entry.get("strip", True))
    if c.delta > 0 and math.isfinite(c.k):
        nr = enc.region_nr_parabola(c)
    else:
        nr = enc.region_half_plane(c)
    return qnr, nr


def figure_sidecar(entry: dict) -> dict:
    qnr, nr = figure_regions(entry)
    d = qnr.derived
    return {
        "title": entry["title"],
        "constants": qnr.constants.to_dict(),
        "k_mu": d.get("k_mu"),
        "lambda_i_ii": d.get("lambda_i_ii"),
        "lambda_ii_iii": d.get("lambda_ii_iii"),
        "I0": d.get("I0"),
        "I0mu": d.get("I0mu"),
        "qnr_region": qnr.to_dict(),
        "nr_region": nr.to_dict(),
    }


def _polyline_rows(lines):
    return [(str(i), z.real, z.imag) for i, line in enumerate(lines) for z in line]


def _mirror(lines):
    return [np.conj(line) for line in lines]


def _emit_regions(out: Path, stem: str, regions, cap: float, samples: int, title: str) -> None:
    styles = [{"stroke": "#c00", "fill": "none", "stroke_width": 1.5}, {"stroke": "#777", "fill": "none", "stroke_width": 1}]
    layers = []
    height = cap
    for region, style in zip(regions, styles * len(regions)):
        lines = enc.region_boundary(region, samples=samples, cap=cap, height=height)
        io.write_csv(out / f"{stem}_{region.label}.csv", ("piece", "re", "im"), _polyline_rows(lines))
        layers.append((lines + _mirror(lines), style))
    io.write_svg(out / f"{stem}.svg", layers, (-cap * 1.05, 0.1 * cap, -height * 1.05, height * 1.05), title=title)


def cmd_figure(config: RunConfig) -> int:
    table = _figure_table()
    entry = table.get(str(config.figure))
    if entry is None:
        raise InvalidParameter(f"unknown figure id {config.figure!r}; known: {', '.join(table)}")
    stem = f"figure{config.figure}"
    qnr, nr = figure_regions(entry)
    _emit_regions(config.out, stem, [qnr, nr], float(entry["cap"]), config.boundary_samples, entry["title"])
    io.write_json(config.out / f"{stem}.json", figure_sidecar(entry))
    return EXIT_OK


def run_verification(model: ModelPair, config: RunConfig):
    """Spectrum against computed and (for pipes) analytic constants, plus structural checks."""
    report = solve_qep(model, vectors=True, debug=config.debug)
    report.checks.pop("eigenvectors")
    tol = max(config.tol * report.scale, 1e-12)
    computed = compute_constants(model, seed=config.seed)
    verify_enclosures(model, computed, tol=tol, report=report, label="computed:")
    analytic = analytic_constants(config)
    if analytic is not None:
        verify_enclosures(model, analytic, tol=tol, report=report, label="analytic:")
    report.checks.update(structural_checks(model, report, computed))
    report.checks["residuals_ok"] = bool(np.all(report.residuals <= 1e-8))
    if model.has_hermitian_damping:
        report.checks["conjugate_symmetric"] = symmetry_check(report, 1e-8 * report.scale)
    for finding in report.gap_findings:
        if finding.guaranteed:
            finding.clean = gap_check(report, finding.interval)
    lams = report.eigenvalues
    report.checks["info"] = {
        "all_real": bool(np.all(np.abs(lams.imag) <= 1e-8 * report.scale)),
        "max_abs_imag": float(np.max(np.abs(lams.imag))),
        "max_residual": float(np.max(report.residuals)),
        "tol": tol,
    }
    return report


def _report_doc(report) -> dict:
    return {
        "source": report.source,
        "passed": report.passed,
        "scale": report.scale,
        "eigenvalues": list(report.eigenvalues),
        "residuals": report.residuals,
        "constants": report.constants,
        "verdicts": report.verdicts,
        "gap_findings": report.gap_findings,
        "checks": report.checks,
    }


def cmd_verify(config: RunConfig) -> int:
    model = load_model(config)
    report = run_verification(model, config)
    io.write_json(config.out / "report.json", _report_doc(report))
    if not report.passed:
        for v in report.verdicts:
            if not v.passed:
                print(f"violation: {v.label} at {v.worst_eigenvalue} (margin {v.margin:.3e})", file=sys.stderr)
        for g in report.gap_findings:
            if g.guaranteed and not g.clean:
                print(f"violation: eigenvalues inside strip {g.label} {g.interval}", file=sys.stderr)
        for k, v in report.checks.items():
            if v is False:
                print(f"violation: check {k} failed", file=sys.stderr)
        return EXIT_VIOLATION
    return EXIT_OK


def cmd_spectrum(config: RunConfig) -> int:
    model = load_model(config)
    report = solve_qep(model, vectors=True, debug=config.debug)
    rows = [(z.real, z.imag, r) for z, r in zip(report.eigenvalues, report.residuals)]
    io.write_csv(config.out / "spectrum.csv", ("re", "im", "residual"), rows)
    return EXIT_OK


def cmd_qnr(config: RunConfig) -> int:
    model = load_model(config)
    samples = sample_qnr(model, config.strategy, config.samples, config.seed)
    io.write_csv(
        config.out / "qnr_samples.csv",
        ("re1", "im1", "re2", "im2"),
        [(s.lambda1.real, s.lambda1.imag, s.lambda2.real, s.lambda2.imag) for s in samples],
    )
    roots = [r for s in samples for r in (s.lambda1, s.lambda2)]
    io.write_csv(config.out / "qnr_roots.csv", ("re", "im"), [(z.real, z.imag) for z in roots])
    support = nr_support(model, config.grid)
    io.write_csv(config.out / "nr_support.csv", ("angle", "value"), zip(support.angles, support.values))
    io.write_csv(config.out / "nr_polygon.csv", ("re", "im"), [(z.real, z.imag) for z in nr_polygon(support)])
    return EXIT_OK


def cmd_region(config: RunConfig) -> int:
    model = load_model(config)
    report = solve_qep(model)
    cap = PLOT_CAP_FACTOR * float(np.max(np.abs(report.eigenvalues.real)))
    if not cap > 0:
        cap = 1.0
    regions = enc.applicable_regions(compute_constants(model, seed=config.seed), model.has_hermitian_damping, "computed_")
    analytic = analytic_constants(config)
    if analytic is not None:
        regions += enc.applicable_regions(analytic, model.has_hermitian_damping, "analytic_")
    _emit_regions(config.out, "regions", regions, cap, config.boundary_samples, "enclosures")
    io.write_json(config.out / "regions.json", {"cap": cap, "regions": [r.to_dict() for r in regions]})
    io.write_csv(config.out / "spectrum.csv", ("re", "im"), [(z.real, z.imag) for z in report.eigenvalues])
    return EXIT_OK


HANDLERS = {
    "constants": cmd_constants,
    "figure": cmd_figure,
    "verify": cmd_verify,
    "qnr": cmd_qnr,
    "spectrum": cmd_spectrum,
    "region": cmd_region,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = config_from_args(args)
        return HANDLERS[config.command](config)
    except InvalidParameter as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (DidNotConverge, LinearizationMismatch) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except QnrEncloseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
