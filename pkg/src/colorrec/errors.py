"""Exception taxonomy shared across the toolkit.

CLI exit codes map onto these: ValidationError -> 2, ProviderError -> 3,
IncompleteRunError -> 4.
"""


class ColorRecError(Exception):
    """Base class for all toolkit errors."""


class ValidationError(ColorRecError):
    """Invalid input data, configuration, or invariant violation."""


class ColorFormatError(ValidationError):
    """A color string or value could not be parsed."""


class ProviderError(ColorRecError):
    """An embedding or chat provider failed."""


class TransportError(ProviderError):
    """Network-level failure, retries exhausted or not retryable."""

    def __init__(self, message, status=None):
        super().__init__(message)
        self.status = status


class RetryableTransportError(TransportError):
    """Transient failure (HTTP 429/5xx, timeout) eligible for retry."""


class AuthError(ProviderError):
    """Authentication/configuration failure; retrying cannot help."""


class ReplyError(ColorRecError):
    """A model reply could not be turned into colors."""


class ExtractionError(ReplyError):
    """No parseable JSON value found in a model reply."""

    def __init__(self, message, reply=""):
        super().__init__(message)
        self.reply = reply


class ReplyStructureError(ReplyError):
    """Reply JSON is missing the expected element/slot structure."""


class ReplyFormatError(ReplyError):
    """A color entry in the reply could not be decoded."""


class ReplyCountError(ReplyError):
    """Reply contains the wrong number of colors."""


class IncompleteRunError(ColorRecError):
    """A benchmark run finished with unprocessed or failed cases."""
