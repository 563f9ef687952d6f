"""Exact determinants of polynomial matrices by error-controlled interpolation."""

from .degbound import degree_bounds, estimate_degree
from .engine import NonConvergenceError, PipelineConfig, PipelineReport, compute_determinant
from .exprio import load_instance, parse_poly, print_poly
from .oracle import det_symbolic_bareiss, det_symbolic_cofactor
from .polycore import Polynomial, PolyMatrix, VarSet

__version__ = "0.1.0"

__all__ = [
    "NonConvergenceError", "PipelineConfig", "PipelineReport", "PolyMatrix", "Polynomial",
    "VarSet", "compute_determinant", "degree_bounds", "det_symbolic_bareiss",
    "det_symbolic_cofactor", "estimate_degree", "load_instance", "parse_poly", "print_poly",
]
