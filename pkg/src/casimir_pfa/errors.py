"""Exception hierarchy shared by all numerical modules."""

from __future__ import annotations


class CasimirError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(CasimirError, ValueError):
    """An argument lies outside the domain of an operation."""


class ConvergenceError(CasimirError, ArithmeticError):
    """Adaptive quadrature did not reach the requested tolerance.

    The best available estimate and its error are kept on the exception so
    callers can decide whether the result is still usable.
    """

    def __init__(self, message: str, best: float, est_error: float):
        super().__init__(f"{message} (best={best!r}, est_error={est_error!r})")
        self.best = best
        self.est_error = est_error


class InvariantViolation(CasimirError, AssertionError):
    """An internal consistency check failed."""
