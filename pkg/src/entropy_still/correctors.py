"""Randomness correctors: the Moonshine typical-set distiller and Von Neumann.

Moonshine reads the input as k-bit windows separated by m skipped bits,
keeps the less frequent half of the observed window values (the typical
set) and rewrites each kept window as a (k-1)-bit index. Everything else
is dropped.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_bits, check_int
from .bitstream import BitStream
from .exceptions import (
    ConfigError,
    DegenerateDataError,
    InsufficientDataError,
)

MAX_K = 24
NEVER = -1


@dataclass(frozen=True)
class DistillConfig:
    """Window length ``k`` and skip length ``m`` (both in bits)."""

    k: int = 8
    m: int = 0

    def __post_init__(self):
        object.__setattr__(self, "k", check_int(self.k, "k", minimum=2, maximum=MAX_K))
        object.__setattr__(self, "m", check_int(self.m, "m", minimum=0))

    @property
    def stride(self):
        return self.k + self.m


@dataclass(frozen=True, eq=False)
class SubsequenceHistogram:
    """Window-value counts and first-occurrence window indices.

    ``first_seen[v]`` is ``NEVER`` (-1) when value ``v`` was not observed.
    """

    k: int
    counts: np.ndarray
    first_seen: np.ndarray
    windows_total: int

    @property
    def observed(self):
        return np.flatnonzero(self.counts)


class RemapTable:
    """The retained window values and their (k-1)-bit output indices."""

    def __init__(self, k, index_of):
        self.k = check_int(k, "k", minimum=2, maximum=MAX_K)
        index_of = {int(v): int(i) for v, i in dict(index_of).items()}
        if len(index_of) > 2 ** (self.k - 1):
            raise ConfigError(
                f"table keeps {len(index_of)} values but k={self.k} allows at most "
                f"{2 ** (self.k - 1)}"
            )
        if sorted(index_of.values()) != list(range(len(index_of))):
            raise ConfigError("table indices must be exactly 0..n-1 with no repeats")
        if any(not 0 <= v < 2**self.k for v in index_of):
            raise ConfigError(f"table values must be {self.k}-bit integers")
        self.index_of = index_of
        lookup = np.full(2**self.k, NEVER, dtype=np.int64)
        for v, i in index_of.items():
            lookup[v] = i
        lookup.setflags(write=False)
        self.lookup = lookup

    @property
    def retained(self):
        return tuple(sorted(self.index_of))

    def __len__(self):
        return len(self.index_of)

    def __eq__(self, other):
        if not isinstance(other, RemapTable):
            return NotImplemented
        return self.k == other.k and self.index_of == other.index_of

    __hash__ = None

    def __repr__(self):
        return f"RemapTable(k={self.k}, retained={len(self)})"

    def to_dict(self):
        return {
            "k": self.k,
            "retained": list(self.retained),
            "index_of": [[v, self.index_of[v]] for v in self.retained],
        }

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data):
        try:
            k = data["k"]
            pairs = data["index_of"]
        except (KeyError, TypeError):
            raise ConfigError("remap table JSON needs 'k' and 'index_of'") from None
        table = cls(k, {v: i for v, i in pairs})
        if "retained" in data and sorted(data["retained"]) != list(table.retained):
            raise ConfigError("remap table 'retained' disagrees with 'index_of'")
        return table

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def _window_values(bits, cfg):
    """Integer values (MSB first) of every complete window."""
    n_windows = (bits.size - cfg.k) // cfg.stride + 1 if bits.size >= cfg.k else 0
    if n_windows <= 0:
        return np.zeros(0, dtype=np.int64)
    starts = np.arange(n_windows, dtype=np.int64) * cfg.stride
    values = np.zeros(n_windows, dtype=np.int64)
    for j in range(cfg.k):
        values = (values << 1) | bits[starts + j]
    return values


def von_neumann(bits):
    """Von Neumann corrector: emit the first bit of every unequal pair.

    Pairs are non-overlapping; ``01`` yields 0, ``10`` yields 1, equal pairs
    are discarded along with an odd trailing bit.

    >>> von_neumann("0110").to01()
    '01'
    """
    b = check_bits(bits)
    pairs = b[: b.size - b.size % 2].reshape(-1, 2)
    first = pairs[:, 0]
    return BitStream(first[first != pairs[:, 1]])


def build_histogram(bits, cfg):
    """Count k-bit window values taken at offsets 0, k+m, 2(k+m), ..."""
    b = check_bits(bits)
    if b.size < cfg.k:
        raise InsufficientDataError(
            f"insufficient warmup data: {b.size} bits, need at least k={cfg.k}"
        )
    values = _window_values(b, cfg)
    counts = np.bincount(values, minlength=2**cfg.k).astype(np.int64)
    first_seen = np.full(2**cfg.k, NEVER, dtype=np.int64)
    uniq, first_idx = np.unique(values, return_index=True)
    first_seen[uniq] = first_idx
    return SubsequenceHistogram(cfg.k, counts, first_seen, int(values.size))


def select_typical(hist):
    """Keep the less frequent half of observed values.

    Observed values are ordered by ``(count, value)`` ascending and the first
    ``min(d // 2, 2**(k-1))`` are retained, ``d`` being the number of
    distinct observed values. Retained values get indices in order of first
    occurrence.
    """
    observed = hist.observed
    if observed.size < 2:
        raise DegenerateDataError(
            "degenerate histogram: fewer than 2 distinct window values "
            "(constant run; try a larger skip m)"
        )
    order = np.lexsort((observed, hist.counts[observed]))
    n_keep = min(observed.size // 2, 2 ** (hist.k - 1))
    kept = observed[order[:n_keep]]
    kept = kept[np.argsort(hist.first_seen[kept], kind="stable")]
    return RemapTable(hist.k, {int(v): i for i, v in enumerate(kept)})


def distill(bits, cfg, table):
    """Rewrite every retained window as its (k-1)-bit index, drop the rest."""
    if table.k != cfg.k:
        raise ConfigError(f"table/config mismatch: table k={table.k}, config k={cfg.k}")
    b = check_bits(bits)
    idx = table.lookup[_window_values(b, cfg)]
    idx = idx[idx != NEVER]
    width = cfg.k - 1
    shifts = np.arange(width - 1, -1, -1, dtype=np.int64)
    out = (idx[:, None] >> shifts) & 1
    return BitStream(out.astype(np.uint8).ravel())


def moonshine(bits, cfg, warmup_fraction=1.0):
    """Fit a remap table on a warmup prefix and distill the whole input.

    Returns
    -------
    (BitStream, RemapTable)
        The distilled key material and the table, which a peer device may
        reuse to derive matching output.
    """
    b = check_bits(bits)
    if not 0 < warmup_fraction <= 1:
        raise ConfigError(f"warmup_fraction must be in (0, 1], got {warmup_fraction}")
    n_warm = math.ceil(warmup_fraction * b.size)
    table = select_typical(build_histogram(b[:n_warm], cfg))
    return distill(b, cfg, table), table


class MoonshineDistiller(TransformerMixin, BaseEstimator):
    """Typical-set distiller with a scikit-learn style interface.

    Parameters
    ----------
    k : int, default=8
        Window length in bits; each retained window becomes ``k - 1`` bits.
    m : int, default=0
        Bits skipped after every window, in both the counting and the
        rewriting pass.
    warmup_fraction : float, default=1.0
        Fraction of the bits passed to ``fit`` that build the histogram.

    Attributes
    ----------
    histogram_ : SubsequenceHistogram
    table_ : RemapTable

    Examples
    --------
    >>> d = MoonshineDistiller(k=2, m=0).fit("0001001001001101")
    >>> d.transform("0001001001001101").to01()
    '01'
    """

    def __init__(self, k=8, m=0, warmup_fraction=1.0):
        self.k = k
        self.m = m
        self.warmup_fraction = warmup_fraction

    def _config(self):
        return DistillConfig(self.k, self.m)

    def fit(self, X, y=None):
        b = check_bits(X)
        if not 0 < self.warmup_fraction <= 1:
            raise ConfigError("warmup_fraction must be in (0, 1]")
        n_warm = math.ceil(self.warmup_fraction * b.size)
        self.histogram_ = build_histogram(b[:n_warm], self._config())
        self.table_ = select_typical(self.histogram_)
        self.n_bits_in_ = int(b.size)
        return self

    @classmethod
    def from_table(cls, table, m=0):
        """Build a fitted distiller around a table received from a peer."""
        est = cls(k=table.k, m=m)
        est.table_ = table
        return est

    def transform(self, X):
        check_is_fitted(self, "table_")
        return distill(X, self._config(), self.table_)

    def retention(self, X):
        """Fraction of input bits that survive distillation."""
        b = check_bits(X)
        return self.transform(b).length / b.size if b.size else 0.0


class VonNeumannCorrector(TransformerMixin, BaseEstimator):
    """Stateless estimator wrapper around :func:`von_neumann`."""

    def fit(self, X=None, y=None):
        return self

    def transform(self, X):
        return von_neumann(X)

    def __sklearn_is_fitted__(self):
        return True
