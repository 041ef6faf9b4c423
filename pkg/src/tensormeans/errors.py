"""Exception hierarchy for tensormeans.

Every exception subclasses the builtin it refines, so callers may catch
``ValueError`` or ``ArithmeticError`` without importing this module.
"""

from typing import Any, Optional


class ShapeMismatchError(ValueError):
    """Raised when operand shapes or the number of inputs disagree."""
    pass


class NotHermitianError(ValueError):
    """Raised when entries are not Hermitian within tolerance."""
    pass


class NotPositiveDefiniteError(ValueError):
    """Raised when a positive-definite precondition fails."""
    pass


class SpectralDomainError(ValueError):
    """Raised when a spectral function is undefined on part of the spectrum."""
    pass


class SingularTensorError(ValueError):
    """Raised when a congruence factor is numerically singular."""
    pass


class InvalidWeightsError(ValueError):
    """Raised for weights that are negative or do not sum to one."""
    pass


class InvalidMeanError(ValueError):
    """Raised for invalid mean or representing-function parameters."""
    pass


class DegenerateConstantError(ValueError):
    """Raised when a Kantorovich constant is undefined for its arguments."""
    pass


class WindowViolationError(ValueError):
    """Raised when inputs leave the declared spectral window [m, M]."""
    pass


class ConfigError(ValueError):
    """Raised when an experiment configuration cannot be loaded."""
    pass


class EigenSolverError(ArithmeticError):
    """Raised when the Hermitian eigensolver fails to converge."""
    pass


class NumericalBreakdownError(ArithmeticError):
    """Raised when an iterate leaves the positive-definite cone."""
    pass


class ConvergenceError(ArithmeticError):
    """Raised when a solver exhausts its iteration budget.

    The diagnostics of the failed solve and the last iterate are attached so
    callers can inspect how far the solver got.
    """

    def __init__(self, message: str, diagnostics: Any = None, last_iterate: Any = None):
        super().__init__(message)
        self.diagnostics = diagnostics
        self.last_iterate = last_iterate


class TrialError(RuntimeError):
    """Raised when a Monte Carlo statistic fails on a specific trial."""

    def __init__(self, message: str, trial_index: Optional[int] = None):
        super().__init__(message)
        self.trial_index = trial_index
