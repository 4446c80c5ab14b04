"""Spectral enclosures for damped second-order systems via the quadratic numerical range."""

from .constants import DampingConstants, compute_constants, pipe_constants
from .enclosures import (
    EnclosureRegion,
    applicable_regions,
    h_0,
    h_i,
    h_ii,
    h_iii,
    interval_I0,
    interval_I0mu,
    k_mu,
    lambdas,
    region_accretive,
    region_boundary,
    region_half_plane,
    region_nr_parabola,
    region_sectorial,
    region_selfadjoint,
)
from .errors import (
    DidNotConverge,
    InsideGap,
    InvalidParameter,
    NonHermitianInput,
    NotAccretive,
    NotPositiveDefinite,
    QnrEncloseError,
    ZeroVector,
)
from .model import ModelPair, build_diag_example, build_pipe, inverse_check, load_custom, make_model, to_energy
from .ranges import QnrSample, SupportFunction, nr_contains, nr_support, qnr_matrix, qnr_roots, sample_qnr
from .spectrum import SpectrumReport, gap_check, solve_qep, symmetry_check, verify_enclosures

__all__ = [name for name in dir() if not name.startswith("_")]
