"""Moment-SOS relaxations of polynomial problems under noise models, with a small SDP solver."""

from .extract import ExtractionConfig, ExtractionResult, certify_point, extract_minimizers
from .poly import Polynomial, basis, parse_polynomial
from .relax import (
    Formulation,
    MomentProblem,
    MomentSequence,
    SdpInstance,
    build_canonical_robust,
    build_noise_dual,
    build_nominal,
    build_priority_psd,
    build_priority_trace,
)
from .robust import verify_minimax, worst_case_polynomial
from .sdpsolve import SolverConfig, SolverResult, Status, solve

__version__ = "0.1.0"

__all__ = [
    "ExtractionConfig",
    "ExtractionResult",
    "Formulation",
    "MomentProblem",
    "MomentSequence",
    "Polynomial",
    "SdpInstance",
    "SolverConfig",
    "SolverResult",
    "Status",
    "basis",
    "build_canonical_robust",
    "build_noise_dual",
    "build_nominal",
    "build_priority_psd",
    "build_priority_trace",
    "certify_point",
    "extract_minimizers",
    "parse_polynomial",
    "solve",
    "verify_minimax",
    "worst_case_polynomial",
]
