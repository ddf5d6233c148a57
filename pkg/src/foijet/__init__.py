"""Exact engine for formal oscillatory integrals and star products built
from them: weighted jets, origin-supported functionals, separation-of-
variables quantization, trace densities, and multilinear functionals,
with numeric and combinatorial cross-checking oracles."""

from .errors import (
    CriticalPointError,
    DivisionError,
    FiltrationError,
    FoijetError,
    HermitianTypeError,
    InconsistentSystemError,
    IntegrabilityError,
    ParseError,
    RealityError,
    SingularHessianError,
    SingularMatrixError,
    TruncationError,
    VariableMismatchError,
)
from .jets import LaurentScalar, T_EXACT, WeightedJet
from .operators import DiffOperator, PointDistribution
from .rational import GaussianRational, gfrac, grat

__all__ = [
    "CriticalPointError",
    "DiffOperator",
    "DivisionError",
    "FiltrationError",
    "FoijetError",
    "GaussianRational",
    "HermitianTypeError",
    "InconsistentSystemError",
    "IntegrabilityError",
    "LaurentScalar",
    "ParseError",
    "PointDistribution",
    "RealityError",
    "SingularHessianError",
    "SingularMatrixError",
    "T_EXACT",
    "TruncationError",
    "VariableMismatchError",
    "WeightedJet",
    "gfrac",
    "grat",
]

__version__ = "0.1.0"
