"""Forward-mode differentiation by truncated multivariate Taylor series."""
from . import backend
from ._space import JetSpace, jet_space
from .core import (
    Jet,
    JetDomainError,
    JetError,
    compose_polynomial,
    cos,
    einsum,
    exp,
    extract_derivative,
    inv,
    lift_arithmetic,
    log,
    power,
    reciprocal,
    seed,
    seed_variable,
    sin,
    sqrt,
    stack,
)

__all__ = [
    "Jet",
    "JetDomainError",
    "JetError",
    "JetSpace",
    "backend",
    "compose_polynomial",
    "cos",
    "einsum",
    "exp",
    "extract_derivative",
    "inv",
    "jet_space",
    "lift_arithmetic",
    "log",
    "power",
    "reciprocal",
    "seed",
    "seed_variable",
    "sin",
    "sqrt",
    "stack",
]
