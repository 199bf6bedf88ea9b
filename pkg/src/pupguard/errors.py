"""Exception types shared across the package."""


class PupguardError(Exception):
    """Base class for all package errors."""


class TimestampError(PupguardError, ValueError):
    """Raised for malformed or out-of-range capture timestamps."""

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class DatasetError(PupguardError, ValueError):
    """Raised for manifest / image-file problems while loading a dataset."""

    def __init__(self, message, row=None):
        super().__init__(message)
        self.row = row


class EmbeddingError(PupguardError, ValueError):
    """Raised for malformed embedding files."""

    def __init__(self, message, line=None):
        super().__init__(message)
        self.line = line


class FitError(PupguardError, ValueError):
    """Raised when a statistic or model cannot be fitted (degenerate input)."""


class ConvergenceError(PupguardError, RuntimeError):
    """Raised when an iterative solver fails to reach its tolerance."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class ProtocolError(PupguardError, ValueError):
    """Raised when the one-class training protocol is violated."""


class ConfigError(PupguardError, ValueError):
    """Raised for inconsistent or unparseable pipeline configuration."""
