"""Error kinds raised by the engine.

Every precondition failure raises a specific subclass of :class:`FoijetError`
so callers (and the CLI) can distinguish bad input from genuine residual
failures.
"""
from __future__ import annotations


class FoijetError(Exception):
    """Base class for all engine errors."""


class ParseError(FoijetError):
    """Malformed problem file or coefficient string."""

    def __init__(self, message: str, field: str | None = None):
        self.field = field
        if field:
            message = f"{field}: {message}"
        super().__init__(message)


class VariableMismatchError(FoijetError):
    """Jets over different variable tuples were combined."""


class TruncationError(FoijetError):
    """A requested coefficient or order lies beyond the tracked truncation.

    ``required`` carries the weight (or order) the input would need.
    """

    def __init__(self, message: str, required: int | None = None):
        self.required = required
        if required is not None:
            message = f"{message} (required truncation: {required})"
        super().__init__(message)


class FiltrationError(FoijetError):
    """An operation needed a positive filtration certificate and did not get one."""


class SingularMatrixError(FoijetError):
    """Exact linear algebra hit a singular matrix."""


class SingularHessianError(SingularMatrixError):
    """The quadratic part of a phase is degenerate."""


class CriticalPointError(FoijetError):
    """The phase has a nonzero critical value or gradient at the base point."""


class HermitianTypeError(FoijetError):
    """A phase expected to be of Hermitian type (no zz or zbzb quadratic part) is not."""


class RealityError(FoijetError):
    """Data required to be real (or a reality-paired jet) is not."""


class InconsistentSystemError(FoijetError):
    """An overdetermined linear system produced contradictory values."""


class IntegrabilityError(FoijetError):
    """A gradient system failed its exact integrability (symmetry) check."""


class DivisionError(FoijetError):
    """Division of formal series by a series that vanishes to its truncation."""
