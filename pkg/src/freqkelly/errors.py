"""Exception hierarchy shared by all freqkelly modules."""

from __future__ import annotations


class KellyError(Exception):
    """Base class for every error raised by freqkelly."""


class InvalidInputError(KellyError, ValueError):
    """Input data violates a documented precondition or schema.

    ``field`` names the offending input when it is known.
    """

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.field = field

    def __str__(self) -> str:
        msg = super().__str__()
        return f"{self.field}: {msg}" if self.field else msg


class EnumerationCapError(KellyError):
    """Exact enumeration of compound scenarios would exceed the configured cap.

    Callers should fall back to :func:`freqkelly.returns_model.compound_sample`.
    """


class ModeMismatchError(KellyError, ValueError):
    """An exact-mode operation received a sampled distribution or vice versa."""


class NonFiniteObjectiveError(KellyError, ArithmeticError):
    """The log-growth objective evaluated to a non-finite value."""


class InsufficientHistoryError(KellyError, ValueError):
    """A sliding window was requested before enough returns were observed."""
