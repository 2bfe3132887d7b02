"""Purification fidelities under classically simulable operations."""
from .conic import ConicProblem, SolveReport, solve
from .matops import HermitianOperator, SitePermutation
from .purification import Ensemble, PurificationInstance, assemble_QR, baseline_fidelity
from .sdp import build_primal, dual_residuals, solve_fidelity

__all__ = [
    "ConicProblem", "Ensemble", "HermitianOperator", "PurificationInstance", "SitePermutation",
    "SolveReport", "assemble_QR", "baseline_fidelity", "build_primal", "dual_residuals", "solve",
    "solve_fidelity",
]
__version__ = "0.1.0"
