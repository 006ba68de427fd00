"""Numerical verification toolkit for minimal Lagrangian graphs.

A graph over R^n into R^{4n} is specified by three scalar potentials; the
submodules check the Lagrangian condition, construct the adapted frame,
evaluate curvature identities, test theorem hypotheses, and apply the
rotation that restores a Hessian lower bound.
"""

__version__ = "0.1.0"

from . import bernstein, config, curvature, frame, geometry, jets, lewy, parser, report
from .errors import (
    BoundViolated,
    DefinitionError,
    DomainError,
    ExpressionSyntaxError,
    MlgError,
    NegativeC,
    NotCommuting,
    NotMinimal,
    ShapeMismatch,
    UnknownIdentifier,
    VariableOutOfRange,
)
from .geometry import PotentialTriple

__all__ = [
    "__version__",
    "bernstein",
    "config",
    "curvature",
    "frame",
    "geometry",
    "jets",
    "lewy",
    "parser",
    "report",
    "BoundViolated",
    "DefinitionError",
    "DomainError",
    "ExpressionSyntaxError",
    "MlgError",
    "NegativeC",
    "NotCommuting",
    "NotMinimal",
    "PotentialTriple",
    "ShapeMismatch",
    "UnknownIdentifier",
    "VariableOutOfRange",
]
