"""Exception types shared across the package."""


class DampedWaveError(Exception):
    """Base class for all package errors."""


class DomainError(DampedWaveError, ValueError):
    """A parameter lies outside the domain an operation accepts."""


class EvaluationError(DampedWaveError, ArithmeticError):
    """A damping function returned a non-finite value."""


class SolverError(DampedWaveError, RuntimeError):
    """A time integrator failed (non-contraction, iteration cap, blow-up)."""

    def __init__(self, message, *, window=None, time=None, last_increment=None):
        super().__init__(message)
        self.window = window
        self.time = time
        self.last_increment = last_increment


class HypothesisError(DampedWaveError, ValueError):
    """A theorem hypothesis required by an operation does not hold."""


class UnknownNameError(DampedWaveError, KeyError):
    """A registry lookup (damping, profile, initial data) failed."""

    def __init__(self, kind, name):
        super().__init__(f"unknown {kind}: {name!r}")
        self.kind = kind
        self.name = name

    def __str__(self):
        return self.args[0]


class NoSolutionError(DampedWaveError, ArithmeticError):
    """A matrix equation has no (unique, positive definite) solution."""
