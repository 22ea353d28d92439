"""Exception types shared across the package."""

from __future__ import annotations


class ConefixError(Exception):
    """Base class for every error raised by this library."""


class LayoutMismatchError(ConefixError):
    """Elements (or an element and a cone) with incompatible layouts were combined."""


class DomainEscapeError(ConefixError):
    """A point left the declared domain of a map or space.

    ``step`` is the iteration index at which the escape happened, when the
    escape occurred inside an iteration loop.
    """

    def __init__(self, message: str, point: float | None = None, step: int | None = None):
        super().__init__(message)
        self.point = point
        self.step = step


class ExpressionSyntaxError(ConefixError):
    """Malformed expression text. ``position`` is 1-based character index."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class UnknownIdentifierError(ExpressionSyntaxError):
    """An identifier that is neither the variable nor a known function."""


class EvaluationError(ConefixError):
    """Expression evaluation hit a pole, a domain fault, or an overflow."""

    def __init__(self, message: str, x: float | None = None):
        if x is not None:
            message = f"{message} (at x={x!r})"
        super().__init__(message)
        self.x = x


class ValidationError(ConefixError):
    """A config or argument failed validation. ``field`` is a dotted key path."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


class PreconditionError(ConefixError):
    """A documented operation precondition does not hold.

    For the localized solver this carries ``gap``, the order-gap vector
    (1-a)*c - d(TSx0, Tx0) whose cone membership failed.
    """

    def __init__(self, message: str, gap: tuple[float, ...] | None = None):
        super().__init__(message)
        self.gap = gap


class BallInvariantError(ConefixError):
    """An iterate's image left the localization ball; signals a wrong modulus or a bug."""

    def __init__(self, message: str, step: int, margin: tuple[float, ...]):
        super().__init__(message)
        self.step = step
        self.margin = margin
