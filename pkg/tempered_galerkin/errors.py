"""Exception hierarchy for the tempered Galerkin solver."""

from __future__ import annotations

from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from .models.report import SolveReport


class GalerkinError(Exception):
    """Base exception for solver errors."""

    pass


class ParameterError(GalerkinError, ValueError):
    """Operator or basis parameters outside their admissible range."""

    pass


class BasisIndexError(GalerkinError, IndexError):
    """Basis function index outside its index set."""

    pass


class DimensionError(GalerkinError, ValueError):
    """Vector length does not match the basis dimension."""

    pass


class SizeGuardError(GalerkinError):
    """Dense operation requested above the configured size limit."""

    pass


class ProblemSpecError(GalerkinError, ValueError):
    """Inconsistent problem description or unknown registered name."""

    pass


class QuadratureError(GalerkinError):
    """A quadrature failed to reach its tolerance."""

    def __init__(self, message: str, shift: int | None = None, integral: str | None = None):
        """Initialize error.

        Args:
            message: Human-readable description
            shift: Toeplitz shift j being integrated, if any
            integral: Identifier of the failing integral
        """
        details = []
        if shift is not None:
            details.append(f"j={shift}")
        if integral is not None:
            details.append(f"integral={integral}")
        suffix = f" ({', '.join(details)})" if details else ""
        super().__init__(message + suffix)
        self.shift = shift
        self.integral = integral


class ConvergenceError(GalerkinError):
    """Iterative solver did not meet its stopping criterion."""

    def __init__(self, message: str, report: SolveReport | None = None):
        super().__init__(message)
        self.report = report
