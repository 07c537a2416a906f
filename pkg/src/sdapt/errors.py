"""Exception hierarchy shared by all pipeline stages.

Every error carries the exit code that the CLI reports for the failing
stage, so library users and the command line agree on failure semantics.
"""

from __future__ import annotations


class SdaptError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class ConfigError(SdaptError):
    """Invalid configuration value, file, or an empty address pool."""

    exit_code = 2


class GenerationError(SdaptError):
    """Alert generation could not satisfy its constraints."""

    exit_code = 3


class CorrelationError(SdaptError):
    """Correlation stage failure."""

    exit_code = 4


class DatasetFormatError(SdaptError):
    """Malformed dataset file; carries the offending line number when known."""

    exit_code = 5

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class PreprocessError(SdaptError):
    """Feature-matrix construction failure."""

    exit_code = 6


class ReportError(SdaptError):
    """Statistics or report emission failure."""

    exit_code = 7


class TaxonomyError(SdaptError, ValueError):
    """Unknown alert type or lifecycle step name."""

    exit_code = 5
