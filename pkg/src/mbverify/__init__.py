"""Numerical verification of Gustafson-type Mellin-Barnes integral identities."""

from .mb_model import MBFamily, MBParameterSet, closed_form_rhs, validate
from .quadrature import ContourSpec, QuadResult

__all__ = ["MBFamily", "MBParameterSet", "ContourSpec", "QuadResult", "closed_form_rhs", "validate"]
__version__ = "0.1.0"
