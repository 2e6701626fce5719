"""Bit sequences, sample streams, file formats and bin-mean bit extraction."""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from ._validation import check_bits, check_int, check_samples
from .exceptions import BitFormatError, ConfigError, InsufficientDataError

FORMATS = ("ascii01", "packed_msb")
_WHITESPACE = frozenset(b" \t\r\n\v\f")


@dataclass(frozen=True, eq=False)
class BitStream:
    """Immutable ordered sequence of bits.

    The bits are held in a read-only ``uint8`` array, so a BitStream can be
    shared freely between threads and pipeline stages.
    """

    bits: np.ndarray

    def __post_init__(self):
        arr = np.array(check_bits(self.bits), dtype=np.uint8, copy=True)
        arr.setflags(write=False)
        object.__setattr__(self, "bits", arr)

    @classmethod
    def from_str(cls, text):
        return read_bits(text.encode("ascii"), "ascii01")

    @property
    def length(self):
        return int(self.bits.size)

    def __len__(self):
        return self.length

    def __iter__(self):
        return iter(self.bits.tolist())

    def __getitem__(self, item):
        if isinstance(item, slice):
            return BitStream(self.bits[item])
        return int(self.bits[item])

    def __eq__(self, other):
        if not isinstance(other, BitStream):
            return NotImplemented
        return np.array_equal(self.bits, other.bits)

    def __hash__(self):
        return hash((self.length, self.bits.tobytes()))

    def __array__(self, dtype=None, copy=None):
        return self.bits if dtype is None else self.bits.astype(dtype)

    def to01(self):
        return (self.bits + ord("0")).tobytes().decode("ascii")

    def ones_fraction(self):
        return float(self.bits.mean()) if self.length else float("nan")

    def __repr__(self):
        shown = self.to01()
        if len(shown) > 32:
            shown = shown[:32] + "..."
        return f"BitStream('{shown}', length={self.length})"


@dataclass(frozen=True, eq=False)
class SampleStream:
    """Quantized ADC samples together with the converter metadata."""

    samples: np.ndarray
    adc_bits: int = 12
    sample_rate_hz: float = 1.0
    full_scale: float = 1.0
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        adc_bits = check_int(self.adc_bits, "adc_bits", minimum=1, maximum=32)
        arr = check_samples(self.samples)
        if arr.size and not np.issubdtype(arr.dtype, np.integer):
            if np.any(arr != np.round(arr)):
                raise BitFormatError("samples must be integers")
        arr = np.array(arr, dtype=np.int64, copy=True)
        if arr.size and (arr.min() < 0 or arr.max() > 2**adc_bits - 1):
            raise BitFormatError(
                f"samples must lie in [0, {2**adc_bits - 1}] for a {adc_bits}-bit ADC"
            )
        if not self.sample_rate_hz > 0:
            raise ConfigError("sample_rate_hz must be positive")
        if not self.full_scale > 0:
            raise ConfigError("full_scale must be positive")
        arr.setflags(write=False)
        object.__setattr__(self, "samples", arr)
        object.__setattr__(self, "adc_bits", adc_bits)

    @property
    def length(self):
        return int(self.samples.size)

    def __len__(self):
        return self.length

    def to_volts(self):
        """Bin-centre voltages, undoing the mid-scale offset."""
        lsb = self.full_scale / 2**self.adc_bits
        return (self.samples + 0.5) * lsb - self.full_scale / 2

    def __eq__(self, other):
        if not isinstance(other, SampleStream):
            return NotImplemented
        return (
            self.adc_bits == other.adc_bits
            and self.sample_rate_hz == other.sample_rate_hz
            and self.full_scale == other.full_scale
            and np.array_equal(self.samples, other.samples)
        )

    __hash__ = None


def read_bits(source, format="ascii01", bit_count=None):
    """Decode bytes into a :class:`BitStream`.

    Parameters
    ----------
    source : bytes
        Raw file content.
    format : {'ascii01', 'packed_msb'}
        ``ascii01`` reads one bit per ``'0'``/``'1'`` character and skips
        whitespace. ``packed_msb`` unpacks each byte most significant bit
        first.
    bit_count : int, optional
        Truncate the decoded stream to this many bits.
    """
    if isinstance(source, str):
        source = source.encode("utf-8")
    source = bytes(source)
    if bit_count is not None:
        bit_count = check_int(bit_count, "bit_count", minimum=0)

    if format == "ascii01":
        raw = np.frombuffer(source, dtype=np.uint8)
        keep = ~np.isin(raw, list(_WHITESPACE))
        chars = raw[keep]
        bad = np.flatnonzero((chars != ord("0")) & (chars != ord("1")))
        if bad.size:
            offset = int(np.flatnonzero(keep)[bad[0]])
            raise BitFormatError(
                f"illegal character {source[offset:offset + 1]!r} at byte offset {offset}"
            )
        bits = chars - ord("0")
    elif format == "packed_msb":
        bits = np.unpackbits(np.frombuffer(source, dtype=np.uint8))
    else:
        raise ConfigError(f"unknown bit format {format!r}; expected one of {FORMATS}")

    if bit_count is not None:
        if bit_count > bits.size:
            raise BitFormatError(
                f"bit_count {bit_count} exceeds the {bits.size} bits available"
            )
        bits = bits[:bit_count]
    return BitStream(bits)


def write_bits(stream, format="ascii01"):
    """Encode bits as bytes; inverse of :func:`read_bits` given the length."""
    bits = check_bits(stream)
    if format == "ascii01":
        return (bits + ord("0")).astype(np.uint8).tobytes()
    if format == "packed_msb":
        return np.packbits(bits).tobytes()
    raise ConfigError(f"unknown bit format {format!r}; expected one of {FORMATS}")


def read_samples_csv(text, adc_bits=12, sample_rate_hz=1.0, full_scale=1.0):
    """Parse a single-column integer CSV, with an optional ``samples`` header."""
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if lines and lines[0].lower() == "samples":
        lines = lines[1:]
    values = []
    for lineno, ln in enumerate(lines, 1):
        try:
            values.append(int(ln))
        except ValueError:
            raise BitFormatError(f"non-integer sample {ln!r} on data line {lineno}") from None
    return SampleStream(
        np.array(values, dtype=np.int64),
        adc_bits=adc_bits,
        sample_rate_hz=sample_rate_hz,
        full_scale=full_scale,
    )


def write_samples_csv(stream, header=True):
    buf = io.StringIO(newline="")
    if header:
        buf.write("samples\n")
    for v in check_samples(stream).tolist():
        buf.write(f"{int(v)}\n")
    return buf.getvalue()


def extract_bits(samples, bin_size=10):
    """Turn a sample stream into one bit per bin of ``bin_size`` samples.

    A bit is 1 when its bin mean is strictly greater than the mean of the
    whole window, else 0. A trailing partial bin is dropped.
    """
    if isinstance(bin_size, bool) or not isinstance(bin_size, (int, np.integer)) or bin_size < 1:
        raise ConfigError("invalid bin size")
    x = check_samples(samples)
    if x.size == 0:
        raise InsufficientDataError("no samples")
    if x.size < bin_size:
        raise InsufficientDataError(
            f"need at least one full bin of {bin_size} samples, got {x.size}"
        )
    x = x.astype(np.int64)
    n_bins = x.size // bin_size
    # Integer comparison of sums avoids float ties: mean_bin > mean_all
    # <=> sum_bin * n > sum_all * bin_size.
    bin_sums = x[: n_bins * bin_size].reshape(n_bins, bin_size).sum(axis=1)
    total = int(x.sum())
    peak = int(np.abs(x).max()) * bin_size * x.size
    if peak >= 2**62:
        bin_sums = bin_sums.astype(object)
    return BitStream((bin_sums * x.size > total * bin_size).astype(np.uint8))


class BinMeanExtractor(TransformerMixin, BaseEstimator):
    """Estimator wrapper around :func:`extract_bits`.

    Stateless: ``fit`` only validates parameters.
    """

    def __init__(self, bin_size=10):
        self.bin_size = bin_size

    def fit(self, X, y=None):
        check_int(self.bin_size, "bin_size", minimum=1)
        return self

    def transform(self, X):
        return extract_bits(X, self.bin_size)
