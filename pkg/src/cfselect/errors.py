"""Exception types shared across the package."""


class CfselectError(Exception):
    """Base class for all package errors."""


class LoadError(CfselectError):
    """Raised when a CSV or schema config cannot be parsed into a Dataset."""


class ParameterError(CfselectError, ValueError):
    """Raised when an operation receives an out-of-contract argument."""


class TrainingError(CfselectError, RuntimeError):
    """Raised when model training diverges (non-finite loss)."""


class ModelFormatError(CfselectError):
    """Raised on corrupt or version-mismatched model files."""


class ConfigError(CfselectError):
    """Raised on invalid run configuration (bad paths, bad keys)."""
