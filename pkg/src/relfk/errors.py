"""Shared exception types.

The command line maps these onto exit codes: configuration problems exit
with 2, numerical failures (quadrature, map construction) with 3, and
violated mathematical invariants with 1.
"""


class DomainError(ValueError):
    """Argument outside the mathematical domain of an operation."""


class ConfigError(ValueError):
    """Malformed or inconsistent run configuration."""


class QuadratureError(RuntimeError):
    """Adaptive quadrature did not reach the requested tolerance.

    Carries the partial estimate and its error bound so callers can decide
    whether the partial result is still usable.
    """

    def __init__(self, message: str, estimate: float = float("nan"),
                 error: float = float("inf")):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


class MapError(RuntimeError):
    """Radial map construction or evaluation failure."""


class InvariantViolation(RuntimeError):
    """A mathematical invariant that must hold was found violated."""
