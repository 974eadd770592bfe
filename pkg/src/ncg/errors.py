"""Exception types shared across the package."""


class NcgError(Exception):
    """Base class for all domain errors raised by this package."""


class InvalidProfileError(NcgError):
    """A strategy profile breaks a structural invariant (self-purchase, bad index)."""


class InvalidDeviationError(NcgError):
    """A deviation sells an edge the player does not own, or is otherwise malformed."""


class LimitExceededError(NcgError):
    """An exhaustive operation was asked to run beyond its configured size limit."""


class FormatError(NcgError):
    """A profile file cannot be parsed; carries the offending line number."""

    def __init__(self, message, line=None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


class RejectionLimitError(NcgError):
    """Rejection sampling failed to produce a suitable graph within its budget."""
