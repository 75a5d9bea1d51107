"""Numerical study of the non-local functional F = lambda * nu_gamma(E_lambda) on BV functions.

Modules
-------
bvcalc
    Exact one-dimensional BV functions (smooth pieces, jumps, Cantor parts).
kernel
    Closed-form integrals of the weight |x - y|^(gamma - 1) over cells.
evaluator1d
    Certified adaptive evaluation of F in one dimension, plus Monte Carlo.
slicer
    Planar functions reduced to one-dimensional slices.
recovery
    Truncation, level staircases, mollification, gluing, recovery families.
harness
    Configured experiments, reports and the claim suite (CLI: ``bvlab``).
"""

from . import bvcalc, evaluator1d, kernel, recovery, slicer
from .errors import BVLabError, DomainError, ParameterError, UnsupportedFormError
from .evaluator1d import FunctionalEstimate, f_eval, f_eval_mc, lambda_sweep
from .kernel import nu_gamma_band, nu_gamma_cell
from .recovery import build_recovery_family, staircase
from .slicer import c_n, f_eval_2d

__version__ = "0.1.0"

__all__ = [
    "BVLabError", "DomainError", "FunctionalEstimate", "ParameterError",
    "UnsupportedFormError", "build_recovery_family", "bvcalc", "c_n", "evaluator1d",
    "f_eval", "f_eval_2d", "f_eval_mc", "kernel", "lambda_sweep", "nu_gamma_band",
    "nu_gamma_cell", "recovery", "slicer", "staircase",
]
