"""Exception hierarchy shared by the library and the CLI."""


class EntropyStillError(ValueError):
    """Base class for every error raised by this package."""


class BitFormatError(EntropyStillError):
    """Malformed bit or sample input (bad characters, bad counts)."""


class ConfigError(EntropyStillError):
    """Invalid parameters or mismatched configuration."""


class DegenerateDataError(EntropyStillError):
    """Input carries no usable variation (constant runs, zero variance)."""


class InsufficientDataError(EntropyStillError):
    """Input too short for the requested operation."""


class NotPositiveDefiniteError(EntropyStillError):
    """Autocorrelation matrix is not positive definite."""
