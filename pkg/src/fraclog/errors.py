"""Exception types raised by :mod:`fraclog`."""

from __future__ import annotations


class FraclogError(Exception):
    """Base class for all library errors."""


class SingularArgument(FraclogError, ValueError):
    """A series or kernel was evaluated where it is singular."""


class InsufficientSamples(FraclogError, ValueError):
    """An operator was asked for a grid index it cannot resolve."""


class NotAnEquilibrium(FraclogError, ValueError):
    """A point passed as an equilibrium is not a root of the model."""


class ConfigError(FraclogError, ValueError):
    """Invalid run configuration. ``field`` names the offending key."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


class TruncationFailure(FraclogError, ArithmeticError):
    """A series hit its term cap before meeting the tolerance.

    The partially summed result is kept on :attr:`result` so callers can
    still inspect the value and its error estimate.
    """

    def __init__(self, message: str, result=None):
        super().__init__(message)
        self.result = result


class NonFiniteState(FraclogError, ArithmeticError):
    """The solver produced a non-finite state or right-hand side.

    :attr:`trajectory` holds the partial trajectory up to the last finite
    grid point.
    """

    def __init__(self, message: str, trajectory=None):
        super().__init__(message)
        self.trajectory = trajectory
