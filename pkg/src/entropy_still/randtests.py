"""A nine-statistic battery in the style of NIST SP 800-22.

The stream is cut into ``N = min(100, len // min_stream_bits)`` equal
sequences. Each statistic yields one p-value per sequence; a statistic
passes when the proportion of p-values at or above ``alpha`` clears the
usual ``(1 - alpha) - 3 * sqrt(alpha * (1 - alpha) / N)`` threshold and the
p-values look uniform (chi-square over ten deciles, p >= 1e-4).

Rank, universal, template matching and linear complexity are not
implemented; pass counts are therefore reported out of nine.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import special
from scipy.stats import norm

from ._validation import check_bits
from .exceptions import ConfigError, InsufficientDataError

TESTS = (
    "frequency",
    "block_frequency",
    "cumsum_fwd",
    "cumsum_rev",
    "runs",
    "longest_run",
    "spectral",
    "approx_entropy",
    "serial",
)
UNIFORMITY_THRESHOLD = 1e-4
MAX_SEQUENCES = 100

# (min sequence length, block length M, K, category lower edge, category probabilities)
_LONGEST_RUN_TABLE = (
    (750_000, 10_000, 6, 10, (0.0882, 0.2092, 0.2483, 0.1933, 0.1208, 0.0675, 0.0727)),
    (6_272, 128, 5, 4, (0.1174, 0.2430, 0.2493, 0.1752, 0.1027, 0.1124)),
    (128, 8, 3, 1, (0.2148, 0.3672, 0.2305, 0.1875)),
)


def erfc(x):
    """Complementary error function."""
    return special.erfc(x)


def igamc(a, x):
    """Regularized upper incomplete gamma function ``Q(a, x)``."""
    if np.any(np.asarray(a) <= 0):
        raise ConfigError("igamc requires a > 0")
    if np.any(np.asarray(x) < 0):
        raise ConfigError("igamc requires x >= 0")
    return special.gammaincc(a, x)


@dataclass(frozen=True)
class BatteryConfig:
    alpha: float = 0.01
    block_bits: int = 100
    min_stream_bits: int = 1000

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise ConfigError("alpha must be in (0, 1)")
        if self.block_bits < 1 or self.min_stream_bits < 1:
            raise ConfigError("block_bits and min_stream_bits must be positive")


@dataclass(frozen=True)
class TestOutcome:
    test_name: str
    p_values: list
    proportion_passing: float
    uniformity_p: float
    passed: bool
    deciles: list
    alpha: float
    params: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)

    __test__ = False  # keep pytest from collecting this class

    @property
    def n_sequences(self):
        return len(self.p_values)

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class BatteryResult:
    outcomes: list
    n_sequences: int
    sequence_bits: int
    config: BatteryConfig

    @property
    def passed_count(self):
        return sum(o.passed for o in self.outcomes)

    @property
    def total(self):
        return len(self.outcomes)

    @property
    def pass_fraction(self):
        return self.passed_count / self.total

    def __getitem__(self, name):
        for o in self.outcomes:
            if o.test_name == name:
                return o
        raise KeyError(name)

    def to_dict(self):
        return {
            "outcomes": [o.to_dict() for o in self.outcomes],
            "aggregate": {"passed_count": self.passed_count, "total": self.total},
            "n_sequences": self.n_sequences,
            "sequence_bits": self.sequence_bits,
            "config": asdict(self.config),
        }

    def to_json(self):
        return json.dumps(self.to_dict())

    def report_text(self):
        """Plain-text table laid out like the NIST final analysis report."""
        head = " ".join(f"C{i:<3d}" for i in range(1, 11))
        lines = [
            f"{head}  P-VALUE    PROPORTION  STATISTICAL TEST",
            "-" * 88,
        ]
        for o in self.outcomes:
            counts = " ".join(f"{c:<4d}" for c in o.deciles)
            passes = round(o.proportion_passing * o.n_sequences)
            mark = "" if o.passed else " *"
            lines.append(
                f"{counts}  {o.uniformity_p:.6f}  {passes:>4d}/{o.n_sequences:<4d}   "
                f"{o.test_name}{mark}"
            )
        lines.append("-" * 88)
        lines.append(
            f"passed {self.passed_count}/{self.total} statistics "
            f"({self.n_sequences} sequences of {self.sequence_bits} bits)"
        )
        return "\n".join(lines)


def _pm1(B):
    return 2.0 * B - 1.0


def _pattern_counts(B, m):
    """Overlapping m-bit pattern counts per row, with wraparound."""
    N, n = B.shape
    if m == 0:
        return np.full((N, 1), n, dtype=np.int64)
    ext = np.concatenate([B, B[:, : m - 1]], axis=1).astype(np.int64)
    vals = np.zeros((N, n), dtype=np.int64)
    for j in range(m):
        vals = (vals << 1) | ext[:, j : j + n]
    offsets = (np.arange(N, dtype=np.int64) * 2**m)[:, None]
    return np.bincount((vals + offsets).ravel(), minlength=N * 2**m).reshape(N, 2**m)


def frequency(B):
    n = B.shape[1]
    s = np.abs(_pm1(B).sum(axis=1)) / math.sqrt(n)
    return erfc(s / math.sqrt(2)), {}


def block_frequency(B, block_bits):
    n = B.shape[1]
    M = min(block_bits, n)
    nb = n // M
    pi = B[:, : nb * M].reshape(B.shape[0], nb, M).mean(axis=2)
    chi2 = 4.0 * M * ((pi - 0.5) ** 2).sum(axis=1)
    return igamc(nb / 2.0, chi2 / 2.0), {"M": M, "blocks": nb}


def runs(B):
    n = B.shape[1]
    pi = B.mean(axis=1)
    tau = 2.0 / math.sqrt(n)
    v_obs = 1 + (B[:, 1:] != B[:, :-1]).sum(axis=1)
    denom = 2.0 * math.sqrt(2 * n) * pi * (1 - pi)
    prereq = np.abs(pi - 0.5) < tau
    with np.errstate(divide="ignore", invalid="ignore"):
        p = erfc(np.abs(v_obs - 2.0 * n * pi * (1 - pi)) / denom)
    p = np.where(prereq, p, 0.0)
    return p, {"prerequisite_failed": int((~prereq).sum())}


def _longest_run_params(n):
    for min_n, M, K, low, probs in _LONGEST_RUN_TABLE:
        if n >= min_n:
            return M, K, low, np.array(probs)
    raise InsufficientDataError(f"longest-run test needs sequences of >= 128 bits, got {n}")


def _longest_ones(blocks):
    """Length of the longest run of ones in each row."""
    R, M = blocks.shape
    run = np.zeros(R, dtype=np.int64)
    best = np.zeros(R, dtype=np.int64)
    for j in range(M):
        run = (run + 1) * blocks[:, j]
        np.maximum(best, run, out=best)
    return best


def longest_run(B):
    N, n = B.shape
    M, K, low, probs = _longest_run_params(n)
    nb = n // M
    blocks = B[:, : nb * M].reshape(N * nb, M).astype(np.int64)
    longest = _longest_ones(blocks).reshape(N, nb)
    cat = np.clip(longest - low, 0, K)
    v = np.stack([(cat == i).sum(axis=1) for i in range(K + 1)], axis=1)
    expected = nb * probs
    chi2 = ((v - expected) ** 2 / expected).sum(axis=1)
    return igamc(K / 2.0, chi2 / 2.0), {"M": M, "K": K, "blocks": nb}


def _tdiv(a, b):
    """Integer division truncating toward zero."""
    q = abs(a) // abs(b)
    return q if (a >= 0) == (b > 0) else -q


def _cusum_p(z, n):
    sq = math.sqrt(n)
    k1 = np.arange(_tdiv(_tdiv(-n, z) + 1, 4), _tdiv(_tdiv(n, z) - 1, 4) + 1)
    k2 = np.arange(_tdiv(_tdiv(-n, z) - 3, 4), _tdiv(_tdiv(n, z) - 1, 4) + 1)
    s1 = np.sum(norm.cdf((4 * k1 + 1) * z / sq) - norm.cdf((4 * k1 - 1) * z / sq))
    s2 = np.sum(norm.cdf((4 * k2 + 3) * z / sq) - norm.cdf((4 * k2 + 1) * z / sq))
    return min(max(1.0 - s1 + s2, 0.0), 1.0)


def cumulative_sums(B, reverse=False):
    n = B.shape[1]
    X = _pm1(B[:, ::-1] if reverse else B)
    z = np.abs(np.cumsum(X, axis=1)).max(axis=1).astype(np.int64)
    return np.array([_cusum_p(int(zi), n) for zi in z]), {}


def spectral(B):
    n = B.shape[1]
    mags = np.abs(np.fft.fft(_pm1(B), axis=1))[:, : n // 2]
    T = math.sqrt(math.log(1 / 0.05) * n)
    n0 = 0.95 * n / 2.0
    n1 = (mags < T).sum(axis=1)
    d = (n1 - n0) / math.sqrt(n * 0.95 * 0.05 / 4)
    return erfc(np.abs(d) / math.sqrt(2)), {"threshold": T}


def _phi(B, m):
    n = B.shape[1]
    c = _pattern_counts(B, m) / n
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(c > 0, c * np.log(c), 0.0)
    return terms.sum(axis=1)


def approx_entropy(B, m):
    n = B.shape[1]
    apen = _phi(B, m) - _phi(B, m + 1)
    chi2 = np.maximum(2.0 * n * (math.log(2) - apen), 0.0)
    return igamc(2.0 ** (m - 1), chi2 / 2.0), {"m": m}


def _psi2(B, m):
    n = B.shape[1]
    if m <= 0:
        return np.zeros(B.shape[0])
    counts = _pattern_counts(B, m).astype(float)
    return (2.0**m / n) * (counts**2).sum(axis=1) - n


def serial(B, m):
    """Serial test; returns the first-difference p-values, second in ``extra``."""
    p0, p1, p2 = _psi2(B, m), _psi2(B, m - 1), _psi2(B, m - 2)
    d1 = np.maximum(p0 - p1, 0.0)
    d2 = np.maximum(p0 - 2 * p1 + p2, 0.0)
    pv1 = igamc(2.0 ** (m - 2), d1 / 2.0)
    pv2 = igamc(2.0 ** (m - 3), d2 / 2.0)
    return pv1, {"m": m, "p_values_2": pv2}


def approx_entropy_m(n):
    return int(min(10, max(2, math.floor(math.log2(n)) - 6)))


def serial_m(n):
    return int(min(16, max(3, math.floor(math.log2(n)) - 5)))


def split_sequences(bits, cfg):
    """Cut the stream into the evaluation sequences (rows of a 2-D array)."""
    b = check_bits(bits)
    if b.size < cfg.min_stream_bits:
        raise InsufficientDataError(
            f"insufficient bits: {b.size} < {cfg.min_stream_bits} required"
        )
    N = min(MAX_SEQUENCES, b.size // cfg.min_stream_bits)
    n = b.size // N
    return b[: N * n].reshape(N, n)


def proportion_threshold(alpha, n_sequences):
    p_hat = 1 - alpha
    return p_hat - 3 * math.sqrt(p_hat * alpha / n_sequences)


def _deciles(p):
    idx = np.minimum((np.asarray(p) * 10).astype(int), 9)
    return np.bincount(idx, minlength=10)


def _uniformity(p):
    counts = _deciles(p)
    expected = len(p) / 10.0
    chi2 = ((counts - expected) ** 2 / expected).sum()
    return float(igamc(4.5, chi2 / 2.0)), counts


def _summarize(name, p, cfg, params, extra, second=None):
    p = np.clip(np.nan_to_num(np.asarray(p, dtype=float), nan=0.0), 0.0, 1.0)
    N = p.size
    proportion = float((p >= cfg.alpha).sum() / N)
    uniformity_p, counts = _uniformity(p)
    threshold = proportion_threshold(cfg.alpha, N)
    passed = proportion >= threshold and uniformity_p >= UNIFORMITY_THRESHOLD
    if second is not None:
        second = np.clip(np.nan_to_num(second, nan=0.0), 0.0, 1.0)
        prop2 = float((second >= cfg.alpha).sum() / N)
        unif2, _ = _uniformity(second)
        passed = passed and prop2 >= threshold and unif2 >= UNIFORMITY_THRESHOLD
        extra = dict(extra, p_values_2=second.tolist(),
                     proportion_passing_2=prop2, uniformity_p_2=unif2)
    params = dict(params, proportion_threshold=threshold)
    return TestOutcome(
        test_name=name,
        p_values=p.tolist(),
        proportion_passing=proportion,
        uniformity_p=uniformity_p,
        passed=bool(passed),
        deciles=counts.tolist(),
        alpha=cfg.alpha,
        params=params,
        extra=extra,
    )


def _run_on_matrix(B, test, cfg):
    n = B.shape[1]
    if test == "frequency":
        p, params = frequency(B)
    elif test == "block_frequency":
        p, params = block_frequency(B, cfg.block_bits)
    elif test == "runs":
        p, info = runs(B)
        return _summarize(test, p, cfg, {}, info)
    elif test == "longest_run":
        p, params = longest_run(B)
    elif test == "cumsum_fwd":
        p, params = cumulative_sums(B)
    elif test == "cumsum_rev":
        p, params = cumulative_sums(B, reverse=True)
    elif test == "spectral":
        p, params = spectral(B)
    elif test == "approx_entropy":
        p, params = approx_entropy(B, approx_entropy_m(n))
    elif test == "serial":
        p, params = serial(B, serial_m(n))
        second = params.pop("p_values_2")
        return _summarize(test, p, cfg, params, {}, second=second)
    else:
        raise ConfigError(f"unknown test {test!r}; expected one of {TESTS}")
    return _summarize(test, p, cfg, params, {})


def run_test(bits, test, cfg=None):
    """Run one statistic over every evaluation sequence of ``bits``."""
    cfg = cfg or BatteryConfig()
    if test not in TESTS:
        raise ConfigError(f"unknown test {test!r}; expected one of {TESTS}")
    return _run_on_matrix(split_sequences(bits, cfg), test, cfg)


def run_battery(bits, cfg=None):
    """Run all nine statistics; see :class:`BatteryResult`."""
    cfg = cfg or BatteryConfig()
    B = split_sequences(bits, cfg)
    outcomes = [_run_on_matrix(B, t, cfg) for t in TESTS]
    return BatteryResult(outcomes, int(B.shape[0]), int(B.shape[1]), cfg)
