"""Exception types shared across the package."""


class PromptMaskError(Exception):
    """Base class for all errors raised by this package."""


class InvalidRule(PromptMaskError):
    """A detection rule regex failed to compile; carries the label name."""

    def __init__(self, label: str, pattern: str, reason: str):
        super().__init__(f"rule for {label} does not compile: {reason} (pattern: {pattern!r})")
        self.label = label
        self.pattern = pattern


class UnknownLabel(PromptMaskError):
    """An entity label spelling is outside the closed label set."""

    def __init__(self, spelling: str):
        super().__init__(f"unknown entity label: {spelling!r}")
        self.spelling = spelling


class MalformedReply(PromptMaskError):
    """Detector LLM reply could not be parsed after all fallbacks."""

    def __init__(self, message: str, raw: str):
        super().__init__(message)
        self.raw = raw


class UpstreamUnavailable(PromptMaskError):
    """Transport-level failure talking to an external service."""

    def __init__(self, message: str, raw: str | None = None):
        super().__init__(message)
        self.raw = raw


class ProtocolError(PromptMaskError):
    """Upstream answered, but the response envelope is malformed."""

    def __init__(self, message: str, raw: str | None = None):
        super().__init__(message)
        self.raw = raw


class SpanMismatch(PromptMaskError):
    """A span returned by an external detector does not reproduce its surface."""


class OverlapViolation(PromptMaskError):
    """Mentions handed to mask() overlap or are unsorted (caller bug)."""


class StorageFailure(PromptMaskError):
    """Session state could not be written to or read from disk."""


class CorruptVault(PromptMaskError):
    """A persisted vault violates its invariants."""


class NotFound(PromptMaskError):
    """No session with the requested id exists."""


class StaleMask(PromptMaskError):
    """Dispatch referenced a mask hash that no longer matches the pending mask."""


class InvalidEdit(PromptMaskError):
    """A reviewer edit references an invalid span or label."""


class DimensionMismatch(PromptMaskError):
    """Vectors of different dimensionality were passed to cosine similarity."""


class UnknownTaskType(PromptMaskError):
    """Task type outside the four supported prompt templates."""
