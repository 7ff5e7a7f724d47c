"""Exception hierarchy shared across the package."""


class TotSearchError(Exception):
    """Base class for all package errors."""


class ConfigError(TotSearchError, ValueError):
    pass


class InvalidStateError(TotSearchError):
    """A thought could not be parsed or applied to the world it describes."""

    def __init__(self, reason: str, depth: int | None = None):
        super().__init__(reason)
        self.reason = reason
        self.depth = depth


class ScoringError(TotSearchError):
    def __init__(self, message: str, depth: int | None = None):
        super().__init__(message)
        self.depth = depth


class EvaluationError(TotSearchError):
    """Evaluator reply could not be turned into a heuristic value."""


class GenerationError(TotSearchError):
    pass


class UnknownNodeError(TotSearchError, KeyError):
    pass


class InstanceFormatError(TotSearchError, ValueError):
    """Problem-instance document is malformed."""
