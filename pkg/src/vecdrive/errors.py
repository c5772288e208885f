"""Exception types shared across the package."""


class VecdriveError(Exception):
    """Base class for all package errors."""


class ShapeError(VecdriveError):
    """Operand shapes are incompatible with the requested operation."""


class DegenerateMaskError(VecdriveError):
    """An attention mask row blocks every key."""


class ConfigError(VecdriveError):
    """A configuration value violates its invariants."""


class ParseError(VecdriveError):
    """A dataset or config file could not be parsed."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class VersionError(VecdriveError):
    """A file declares an unsupported schema version."""


class DeterminismError(VecdriveError):
    """Repeated evaluation of a supposedly pure function disagreed."""


class TrainingAbort(VecdriveError):
    """Training stopped because of a non-finite loss or gradient."""
