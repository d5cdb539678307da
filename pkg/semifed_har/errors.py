"""
Exception hierarchy for the semi-supervised federated HAR simulator.

Every error subclasses the builtin a caller would naturally catch
(ValueError / RuntimeError), so existing ``except ValueError`` handlers
keep working.
"""

from typing import List, Optional


class SemiFedError(Exception):
    """Base class for all simulator errors."""


class DimensionError(SemiFedError, ValueError):
    """Raised when tensor shapes are inconsistent."""

    def __init__(self, message: str, left: Optional[tuple] = None, right: Optional[tuple] = None):
        if left is not None or right is not None:
            message = f"{message}: {left} vs {right}"
        super().__init__(message)
        self.left = left
        self.right = right


class ConfigurationError(SemiFedError, ValueError):
    """Raised for invalid layer, model or spec configuration."""


class DegenerateBatchError(SemiFedError, ValueError):
    """Raised when batch statistics cannot be computed (single element)."""


class NumericalError(SemiFedError, RuntimeError):
    """Raised when a computation produces non-finite values."""

    def __init__(self, message: str, diagnostics: Optional[List[str]] = None):
        self.diagnostics = list(diagnostics or [])
        if self.diagnostics:
            message = f"{message} ({', '.join(self.diagnostics)})"
        super().__init__(message)


class DataError(SemiFedError, ValueError):
    """Raised for invalid dataset contents."""


class ParseError(DataError):
    """Raised when a dataset file cannot be parsed."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"{message} at line {line}"
        super().__init__(message)


class PartitionError(SemiFedError, ValueError):
    """Raised when a sampling or partitioning request is infeasible."""


class AggregationError(SemiFedError, ValueError):
    """Raised when client updates cannot be aggregated."""


class ConfigError(SemiFedError, ValueError):
    """Raised for invalid experiment configuration; message names the key."""

    def __init__(self, key: str, message: str):
        self.key = key
        super().__init__(f"{key}: {message}")


class BenchError(SemiFedError, ValueError):
    """Raised when a benchmark precondition is not met."""


class CheckpointError(SemiFedError, ValueError):
    """Base class for checkpoint decoding failures."""


class CheckpointMagicError(CheckpointError):
    """The file does not start with the checkpoint magic."""


class CheckpointChecksumError(CheckpointError):
    """The trailing checksum does not match the file contents."""


class CheckpointTruncatedError(CheckpointError):
    """The file ends before the declared contents."""


class CheckpointFormatError(CheckpointError):
    """The checksum matches but the records inside do not parse."""
