"""Self-adjoint extensions of Sturm-Liouville operators with two limit-circle ends."""

from __future__ import annotations

from .errors import SLXError
from .odecore import CONVENTION, BoundaryData, BoundaryEvaluator
from .problem import SLProblem, builtin, load_problem, validate_problem
from .spectra import CoupledBC, Matrix, Relation, eigenvalues, multiplicity

__version__ = "0.1.0"

__all__ = [
    "CONVENTION",
    "BoundaryData",
    "BoundaryEvaluator",
    "CoupledBC",
    "Matrix",
    "Relation",
    "SLProblem",
    "SLXError",
    "builtin",
    "eigenvalues",
    "load_problem",
    "multiplicity",
    "validate_problem",
]
