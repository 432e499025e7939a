"""Exception types shared across the package."""

from __future__ import annotations


class Thue2DliteError(Exception):
    """Base class for every error raised by this package."""


class InputSyntaxError(Thue2DliteError):
    """Malformed text input; carries a 1-based line number when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ThueParseError(InputSyntaxError):
    """Malformed .thue instance file."""


class UnknownSymbolError(ThueParseError):
    """A word or query refers to a symbol outside the alphabet."""


class EmptyRuleSideError(ThueParseError):
    """A rule or goal side parsed to the empty word."""


class MissingGoalError(ThueParseError):
    """The instance file declares no goal line."""


class DuplicateAlphabetSymbolError(ThueParseError):
    """The alphabet line repeats a symbol."""


class ReservedSymbolError(ThueParseError):
    """An alphabet symbol collides with a reserved relation name."""


class MissingConstantError(Thue2DliteError):
    """A structure does not interpret a constant that a check requires."""


class DuplicateConstantError(Thue2DliteError):
    """Two structures being combined interpret the same constant name."""


class NotClosedAtBoundError(Thue2DliteError):
    """The bounded congruence could not be certified finite at this bound."""

    def __init__(self, max_len: int, reason: str):
        self.max_len = max_len
        self.reason = reason
        super().__init__(f"quotient not certified at word length {max_len}: {reason}")


class CeilingExceededError(Thue2DliteError):
    """An exhaustive enumeration request is above the configured ceiling."""


class UnsafeQueryError(Thue2DliteError):
    """A query uses a variable in a negative literal only."""
