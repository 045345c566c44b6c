"""Exception types shared across the package."""


class MultihopError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(MultihopError):
    """Malformed input file. Carries the 1-based line number when known."""

    def __init__(self, message: str, line_no: int | None = None):
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)
        self.line_no = line_no


class DataError(MultihopError):
    """Structurally valid input that violates a dataset-level contract."""


class GenerationError(MultihopError):
    """Synthetic-graph config that cannot be satisfied."""


class ConfigError(MultihopError):
    """Invalid run configuration (illegal arch/comp combination, bad dims, ...)."""


class DimensionError(MultihopError):
    """Vector/matrix shape mismatch in a numeric operation."""


class NumericError(MultihopError):
    """Non-finite loss or other numeric failure during training."""


class CheckpointError(MultihopError):
    """Unreadable checkpoint or checkpoint/config mismatch."""
