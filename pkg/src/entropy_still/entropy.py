"""Entropy-rate and mutual-information estimation for sampled noise.

The Shannon entropy rate of a stationary Gaussian process with
autocorrelation ``alpha_0..alpha_p`` is ``0.5 * log2(2*pi*e * |K_p|/|K_{p-1}|)``
where ``K_p`` is the Toeplitz autocorrelation matrix. The determinant ratio
is the one-step prediction error variance of the order-p autoregressive
fit, which the Levinson recursion produces directly. A QR-based estimate
(``r_pp`` of the positive-diagonal QR factor) is provided for comparison;
it does not equal the determinant ratio in general.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np
import scipy.linalg
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import check_int, check_samples
from .exceptions import (
    ConfigError,
    DegenerateDataError,
    InsufficientDataError,
    NotPositiveDefiniteError,
)

LOG2_2PIE = math.log2(2 * math.pi * math.e)
# shannon_gaussian(sigma) - renyi_awgn(sigma), independent of sigma
GAUSSIAN_RENYI_GAP = 0.5 * math.log2(math.e / 2)
METHODS = ("levinson", "qr_rpp", "direct")
DEFAULT_ORDER = 64


@dataclass(frozen=True, eq=False)
class AcfSequence:
    """Autocorrelation values at lags ``0..order``."""

    lags: np.ndarray

    def __post_init__(self):
        lags = np.array(self.lags, dtype=float, copy=True).ravel()
        if lags.size < 2:
            raise ConfigError("an autocorrelation sequence needs at least lags 0 and 1")
        if not np.all(np.isfinite(lags)):
            raise ConfigError("autocorrelation values must be finite")
        if lags[0] <= 0:
            raise DegenerateDataError("zero-variance process (alpha_0 <= 0)")
        if np.any(np.abs(lags[1:]) > lags[0] * (1 + 1e-12)):
            raise NotPositiveDefiniteError("invalid autocorrelation: |alpha_j| > alpha_0")
        lags.setflags(write=False)
        object.__setattr__(self, "lags", lags)

    @property
    def order(self):
        return self.lags.size - 1

    def __len__(self):
        return self.lags.size

    def __eq__(self, other):
        if not isinstance(other, AcfSequence):
            return NotImplemented
        return np.array_equal(self.lags, other.lags)

    __hash__ = None


@dataclass(frozen=True)
class EntropyReport:
    shannon_rate_bits: float
    renyi_rate_bits: float
    det_ratio: float
    order: int
    method: str
    sigma_est: float | None = None
    extra: dict = field(default_factory=dict)

    def to_dict(self):
        d = asdict(self)
        if not d["extra"]:
            del d["extra"]
        return d

    def to_json(self):
        return json.dumps(self.to_dict())


def _as_acf(acf):
    return acf if isinstance(acf, AcfSequence) else AcfSequence(acf)


def acf_from_samples(samples, max_lag=DEFAULT_ORDER):
    """Biased sample autocorrelation of the mean-removed samples.

    Dividing by ``n`` at every lag keeps the Toeplitz matrix positive
    semidefinite.
    """
    x = check_samples(samples).astype(float)
    max_lag = check_int(max_lag, "max_lag", minimum=1)
    if max_lag >= x.size:
        raise InsufficientDataError(
            f"max_lag={max_lag} must be smaller than the {x.size} samples"
        )
    x = x - x.mean()
    n = x.size
    lags = np.array([np.dot(x[: n - j], x[j:]) for j in range(max_lag + 1)]) / n
    return AcfSequence(lags)


def acf_from_psd(psd, sample_rate_hz, n_samples=None, max_lag=None):
    """Autocorrelation from a one-sided power spectral density.

    ``psd`` follows the ``scipy.signal.periodogram`` density convention:
    bins ``0..n//2`` in units^2/Hz, interior bins doubled to fold in the
    negative frequencies. The symmetric two-sided spectrum is rebuilt and
    inverse transformed, so ``alpha_0`` equals the total power
    ``sum(two_sided) * fs / n`` and a periodogram of ``x`` maps back to the
    circular biased autocorrelation of ``x``.

    A flat density of height ``c`` therefore gives ``alpha_0 ~ c * fs / 2``.

    Parameters
    ----------
    psd : array_like
        One-sided PSD values, non-negative.
    sample_rate_hz : float
    n_samples : int, optional
        Length of the underlying record; defaults to ``2 * (len(psd) - 1)``.
    max_lag : int, optional
        Highest lag returned; defaults to ``n_samples - 1``.
    """
    p = np.asarray(psd, dtype=float).ravel()
    if p.size < 2:
        raise ConfigError("psd needs at least two bins")
    if not np.all(np.isfinite(p)) or np.any(p < 0):
        raise ConfigError("psd values must be finite and non-negative")
    if not sample_rate_hz > 0:
        raise ConfigError("sample_rate_hz must be positive")
    if not np.any(p > 0):
        raise DegenerateDataError("zero-variance process (all-zero PSD)")
    n = 2 * (p.size - 1) if n_samples is None else check_int(n_samples, "n_samples")
    if n // 2 + 1 != p.size:
        raise ConfigError(f"n_samples={n} is inconsistent with {p.size} one-sided bins")
    two_sided_half = p * sample_rate_hz / 2
    two_sided_half[0] *= 2
    if n % 2 == 0:
        two_sided_half[-1] *= 2
    # irfft of |X|^2/n gives (1/n) sum_t x_t x_{t+j}; |X|^2/n = half-density * fs.
    acf = np.fft.irfft(two_sided_half, n=n)
    if max_lag is not None:
        max_lag = check_int(max_lag, "max_lag", minimum=1, maximum=n - 1)
        acf = acf[: max_lag + 1]
    return AcfSequence(acf)


def toeplitz(acf):
    """Symmetric Toeplitz matrix with entry (i, j) = alpha_|i-j|."""
    return scipy.linalg.toeplitz(_as_acf(acf).lags)


def levinson_durbin(acf):
    """Order-recursive solution of the Yule-Walker equations.

    Returns
    -------
    a : ndarray, shape (p,)
        Coefficients of ``X_m + sum_k a_k X_{m-k} = Z_m``.
    reflection : ndarray, shape (p,)
        Reflection coefficients of each stage.
    errors : ndarray, shape (p + 1,)
        Prediction error variance at orders 0..p; ``errors[i]`` equals
        ``|K_i| / |K_{i-1}|``.
    """
    r = _as_acf(acf).lags
    p = r.size - 1
    a = np.zeros(0)
    reflection = np.empty(p)
    errors = np.empty(p + 1)
    errors[0] = r[0]
    err = r[0]
    for i in range(1, p + 1):
        kappa = -(r[i] + np.dot(a, r[i - 1 : 0 : -1])) / err
        if not abs(kappa) < 1:
            raise NotPositiveDefiniteError(
                f"not positive definite: reflection coefficient {kappa:.6g} at order {i}"
            )
        a = np.concatenate([a + kappa * a[::-1], [kappa]])
        err = err * (1 - kappa * kappa)
        if not err > 0:
            raise NotPositiveDefiniteError(f"not positive definite at order {i}")
        reflection[i - 1] = kappa
        errors[i] = err
    return a, reflection, errors


def det_ratio_levinson(acf):
    """``|K_p| / |K_{p-1}|`` as the final prediction error variance."""
    return float(levinson_durbin(acf)[2][-1])


def det_ratio_direct(acf):
    """``|K_p| / |K_{p-1}|`` from two log-determinants (float64)."""
    K = toeplitz(acf)
    s1, ld1 = np.linalg.slogdet(K)
    s0, ld0 = np.linalg.slogdet(K[:-1, :-1])
    if s1 <= 0 or s0 <= 0:
        raise NotPositiveDefiniteError("not positive definite")
    return float(math.exp(ld1 - ld0))


def qr_positive(K):
    """QR factorization normalized so that ``diag(R) > 0`` (unique for full rank)."""
    K = np.asarray(K, dtype=float)
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise ConfigError(f"expected a square matrix, got shape {K.shape}")
    Q, R = np.linalg.qr(K)
    d = np.diag(R)
    tol = max(K.shape) * np.finfo(float).eps * max(np.abs(K).max(), 1e-300)
    if np.any(np.abs(d) <= tol):
        raise NotPositiveDefiniteError("matrix is rank deficient")
    signs = np.sign(d)
    return Q * signs, R * signs[:, None]


def det_ratio_qr(K):
    """Last diagonal entry of R in the positive-diagonal QR of ``K``.

    This equals ``|K| / |K without its last row and column|`` only when the
    leading block of R is also the R factor of the leading block of K, which
    is not generally true: for ``[[1, .5], [.5, 1]]`` it returns ~0.6708
    against a true ratio of 0.75.
    """
    K = np.asarray(K, dtype=float)
    if K.ndim == 2 and not np.allclose(K, K.T, rtol=1e-10, atol=0):
        raise ConfigError("matrix must be symmetric")
    _, R = qr_positive(K)
    return float(R[-1, -1])


def shannon_gaussian(sigma):
    """Differential entropy of N(0, sigma^2) in bits: ``log2(sigma*sqrt(2*pi*e))``."""
    if not sigma > 0:
        raise ConfigError("sigma must be positive")
    return math.log2(sigma) + 0.5 * LOG2_2PIE


def renyi_awgn(sigma):
    """Order-2 Renyi entropy of finely quantized AWGN: ``log2(2*sigma*sqrt(pi))``."""
    if not sigma > 0:
        raise ConfigError("sigma must be positive")
    return math.log2(2 * sigma * math.sqrt(math.pi))


def _check_distribution(p):
    p = np.asarray(p, dtype=float).ravel()
    if p.size == 0 or not np.all(np.isfinite(p)) or np.any(p < 0):
        raise ConfigError("probabilities must be finite and non-negative")
    if abs(p.sum() - 1) > 1e-9:
        raise ConfigError(f"probabilities must sum to 1, got {p.sum():.12g}")
    return p


def renyi_discrete(p):
    """Collision (order-2 Renyi) entropy ``-log2 sum p^2`` in bits."""
    p = _check_distribution(p)
    return float(-math.log2(np.dot(p, p)))


def shannon_discrete(p):
    p = _check_distribution(p)
    nz = p[p > 0]
    return float(-np.dot(nz, np.log2(nz)))


def solve_yule_walker(acf):
    """AR coefficients ``a_1..a_p`` of ``X_m = -sum_k a_k X_{m-k} + Z_m``.

    Note the leading minus: for an AR(1) autocorrelation ``rho**j`` the
    result is ``[-rho]``.
    """
    return levinson_durbin(acf)[0]


def ar_acf(a, noise_var, n_lags):
    """Autocorrelation at lags ``0..n_lags`` implied by an AR model.

    Solves the Yule-Walker system for the ACF given the coefficients (the
    reverse direction of :func:`solve_yule_walker`).
    """
    a = np.asarray(a, dtype=float)
    p = a.size
    size = max(p, n_lags) + 1
    # Unknowns r_0..r_p: r_j + sum_k a_k r_|j-k| = noise_var * [j == 0].
    A = np.zeros((p + 1, p + 1))
    rhs = np.zeros(p + 1)
    rhs[0] = noise_var
    coef = np.concatenate([[1.0], a])
    for j in range(p + 1):
        for k in range(p + 1):
            A[j, abs(j - k)] += coef[k]
    r = np.zeros(size)
    r[: p + 1] = np.linalg.solve(A, rhs)
    for j in range(p + 1, size):
        r[j] = -np.dot(a, r[j - 1 : j - p - 1 : -1]) if p else 0.0
    return r[: n_lags + 1]


def shannon_rate(acf, method="levinson"):
    """Shannon entropy rate (bits/sample) of the Gaussian process with this ACF.

    The report also carries the Renyi rate ``log2(2*sqrt(pi*det_ratio))``,
    i.e. the AWGN Renyi formula applied to the innovation deviation.
    """
    acf = _as_acf(acf)
    if method == "levinson":
        ratio = det_ratio_levinson(acf)
    elif method == "qr_rpp":
        ratio = det_ratio_qr(toeplitz(acf))
    elif method == "direct":
        ratio = det_ratio_direct(acf)
    else:
        raise ConfigError(f"unknown method {method!r}; expected one of {METHODS}")
    if not ratio > 0:
        raise NotPositiveDefiniteError(f"determinant ratio {ratio} is not positive")
    sigma = math.sqrt(ratio)
    return EntropyReport(
        shannon_rate_bits=0.5 * math.log2(2 * math.pi * math.e * ratio),
        renyi_rate_bits=renyi_awgn(sigma),
        det_ratio=ratio,
        order=acf.order,
        method=method,
        sigma_est=sigma,
    )


def compare_det_ratios(acf):
    """All determinant-ratio estimates side by side, with the QR discrepancy."""
    acf = _as_acf(acf)
    lev = det_ratio_levinson(acf)
    qr = det_ratio_qr(toeplitz(acf))
    return {
        "levinson": lev,
        "direct": det_ratio_direct(acf),
        "qr_rpp": qr,
        "qr_relative_error": (qr - lev) / lev,
    }


@dataclass(frozen=True)
class MutualInformationReport:
    mean_mi_bits: float
    block_mi_bits: list
    block_entropy_a_bits: list
    block_entropy_b_bits: list
    block_len: int
    quant_bits: int

    @property
    def mean_entropy_a_bits(self):
        return float(np.mean(self.block_entropy_a_bits))

    @property
    def mean_entropy_b_bits(self):
        return float(np.mean(self.block_entropy_b_bits))

    def to_dict(self):
        d = asdict(self)
        d["mean_entropy_a_bits"] = self.mean_entropy_a_bits
        d["mean_entropy_b_bits"] = self.mean_entropy_b_bits
        return d


def requantize(x, quant_bits):
    """Map a block onto ``2**quant_bits`` equal-width levels spanning its range."""
    x = np.asarray(x, dtype=float)
    levels = 2**quant_bits
    lo, hi = x.min(), x.max()
    if hi == lo:
        return np.zeros(x.size, dtype=np.int64)
    q = np.floor((x - lo) / (hi - lo) * levels).astype(np.int64)
    return np.minimum(q, levels - 1)


def _plugin_entropy(counts, n):
    c = counts[counts > 0] / n
    return float(-np.dot(c, np.log2(c)))


def mutual_information(a, b, block_len=150_000, quant_bits=6):
    """Plug-in histogram mutual information between two sample streams.

    Both streams are cut into ``len // block_len`` blocks; each block is
    requantized, the joint histogram is formed and
    ``I = H(A) + H(B) - H(A, B)`` is computed. The mean over blocks is
    reported together with each block's marginal entropies.
    """
    xa = check_samples(a, "a")
    xb = check_samples(b, "b")
    if xa.size != xb.size:
        raise ConfigError(f"length mismatch: {xa.size} vs {xb.size} samples")
    block_len = check_int(block_len, "block_len", minimum=1)
    quant_bits = check_int(quant_bits, "quant_bits", minimum=1, maximum=12)
    if block_len > xa.size:
        raise InsufficientDataError(
            f"block_len={block_len} exceeds the stream length {xa.size}"
        )
    levels = 2**quant_bits
    mi, ha, hb = [], [], []
    for start in range(0, xa.size - block_len + 1, block_len):
        qa = requantize(xa[start : start + block_len], quant_bits)
        qb = requantize(xb[start : start + block_len], quant_bits)
        h_a = _plugin_entropy(np.bincount(qa, minlength=levels), block_len)
        h_b = _plugin_entropy(np.bincount(qb, minlength=levels), block_len)
        h_ab = _plugin_entropy(np.bincount(qa * levels + qb, minlength=levels**2), block_len)
        info = min(max(h_a + h_b - h_ab, 0.0), h_a, h_b)
        mi.append(info)
        ha.append(h_a)
        hb.append(h_b)
    return MutualInformationReport(
        mean_mi_bits=float(np.mean(mi)),
        block_mi_bits=mi,
        block_entropy_a_bits=ha,
        block_entropy_b_bits=hb,
        block_len=block_len,
        quant_bits=quant_bits,
    )


class EntropyRateEstimator(BaseEstimator):
    """Estimate the entropy rate of a sampled noise process.

    Parameters
    ----------
    order : int, default=64
        Autoregressive order ``p``; the number of autocorrelation lags used.
    method : {'levinson', 'qr_rpp', 'direct'}, default='levinson'
        How the determinant ratio is computed.

    Attributes
    ----------
    acf_ : AcfSequence
    report_ : EntropyReport
    coef_ : ndarray
        Fitted AR coefficients (leading-minus convention).
    """

    def __init__(self, order=DEFAULT_ORDER, method="levinson"):
        self.order = order
        self.method = method

    def fit(self, X, y=None):
        if self.method not in METHODS:
            raise ConfigError(f"unknown method {self.method!r}")
        self.acf_ = acf_from_samples(X, self.order)
        self.report_ = shannon_rate(self.acf_, self.method)
        self.coef_ = solve_yule_walker(self.acf_)
        return self

    def fit_acf(self, acf):
        self.acf_ = _as_acf(acf)
        self.report_ = shannon_rate(self.acf_, self.method)
        self.coef_ = solve_yule_walker(self.acf_)
        return self

    def score(self, X=None, y=None):
        """Shannon entropy rate in bits per sample."""
        check_is_fitted(self, "report_")
        return self.report_.shannon_rate_bits
