"""Exact one-dimensional BV functions and their derivative measures."""

from .cantor import cantor_array, cantor_integral_array, eval_cantor
from .catalog import (affine, cantor, constant, dumps, from_dict, loads, poly, sine,
                      spline, step, steps, sum_of, to_dict)
from .forms import PPolyForm, SineForm, affine_form, poly_form, spline_form
from .function import BV1D, CantorComponent, DerivDecomp, SmoothPiece
from .measures import (area_functional, area_strict_gap, l1_distance, signed_measure,
                       total_variation, variation_decomposition)
from .sets import OpenSet1D


def eval(u, x):
    """Value of the precise representative of u at x."""
    return u(x)


__all__ = [
    "BV1D", "CantorComponent", "DerivDecomp", "OpenSet1D", "PPolyForm", "SineForm",
    "SmoothPiece", "affine", "affine_form", "area_functional", "area_strict_gap",
    "cantor", "cantor_array", "cantor_integral_array", "constant", "dumps", "eval",
    "eval_cantor", "from_dict", "l1_distance", "loads", "poly", "poly_form",
    "signed_measure", "sine", "spline", "spline_form", "step", "steps", "sum_of",
    "to_dict", "total_variation", "variation_decomposition",
]
