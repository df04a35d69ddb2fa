"""Exact and numerical tools for eigenfunctions of the twisted Laplacian on R^{2n}."""

from .eigenbasis import EigenLabel, build_eigenfunction, build_radial, enumerate_labels
from .hermite_core import CPoly, CQ, GaussianFn, apply_L, evaluate, ladder_lower, ladder_raise
from .moments import ExactValue, inner_exact, lp_norm_exact_even
from .projection import expand, kernel_diag_origin, project, twisted_translate
from .quadrature import QuadSpec, lp_norm_numeric

__version__ = "0.1.0"

__all__ = [
    "CPoly",
    "CQ",
    "EigenLabel",
    "ExactValue",
    "GaussianFn",
    "QuadSpec",
    "apply_L",
    "build_eigenfunction",
    "build_radial",
    "enumerate_labels",
    "evaluate",
    "expand",
    "inner_exact",
    "kernel_diag_origin",
    "ladder_lower",
    "ladder_raise",
    "lp_norm_exact_even",
    "lp_norm_numeric",
    "project",
    "twisted_translate",
]
