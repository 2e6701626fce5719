"""Input validation helpers used by the estimators and functions."""

from __future__ import annotations

import numbers

import numpy as np

from .exceptions import BitFormatError, ConfigError


def check_bits(bits, name="bits"):
    """Coerce ``bits`` into a 1-D ``uint8`` array of zeros and ones.

    Accepts a :class:`~entropy_still.bitstream.BitStream`, a ``'0'/'1'``
    string, or any array-like of integers/booleans.
    """
    data = getattr(bits, "bits", None)
    if data is not None:
        return data
    if isinstance(bits, str):
        arr = np.frombuffer(bits.encode("ascii"), dtype=np.uint8) - ord("0")
    else:
        arr = np.asarray(bits)
    if arr.ndim != 1:
        raise BitFormatError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if arr.size == 0:
        return np.zeros(0, dtype=np.uint8)
    if arr.dtype == bool:
        return arr.astype(np.uint8)
    if not np.issubdtype(arr.dtype, np.integer):
        if not np.all(np.isfinite(arr)) or np.any(arr != np.round(arr)):
            raise BitFormatError(f"{name} must contain only 0 and 1")
    if np.any((arr != 0) & (arr != 1)):
        raise BitFormatError(f"{name} must contain only 0 and 1")
    return arr.astype(np.uint8)


def check_samples(samples, name="samples"):
    """Return the integer sample array from a SampleStream or array-like."""
    data = getattr(samples, "samples", None)
    arr = np.asarray(samples if data is None else data)
    if arr.ndim != 1:
        raise BitFormatError(f"{name} must be one-dimensional, got shape {arr.shape}")
    return arr


def check_int(value, name, *, minimum=None, maximum=None):
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise ConfigError(f"{name} must be an integer, got {value!r}")
    value = int(value)
    if minimum is not None and value < minimum:
        raise ConfigError(f"{name} must be >= {minimum}, got {value}")
    if maximum is not None and value > maximum:
        raise ConfigError(f"{name} must be <= {maximum}, got {value}")
    return value
