"""Synthetic noise sources: random-phase harmonics plus Gaussian noise.

Each device observes ``x_i(t) = D(t) + Z_c(t) + Z_i(t)`` where
``D(t) = sum_k a_k cos(2*pi*k*f*t + theta)`` has one phase shared by all
devices, ``Z_c`` is noise common to all devices and ``Z_i`` is private.
Samples are offset to mid-scale and quantized to ``adc_bits`` with
saturation.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np

from ._validation import check_int
from .bitstream import SampleStream
from .entropy import AcfSequence
from .exceptions import ConfigError


@dataclass(frozen=True)
class SourceModel:
    coeffs: tuple = ()
    fundamental_hz: float = 60.0
    sigma_common: float = 1.0
    sigma_device: float = 0.65
    adc_bits: int = 12
    full_scale: float = 16.0
    sample_rate_hz: float = 8000.0
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs))
        check_int(self.adc_bits, "adc_bits", minimum=1, maximum=32)
        check_int(self.seed, "seed", minimum=0, maximum=2**64 - 1)
        if not self.fundamental_hz > 0:
            raise ConfigError("fundamental_hz must be positive")
        if self.sigma_common < 0 or self.sigma_device < 0:
            raise ConfigError("noise deviations must be non-negative")
        if not self.full_scale > 0 or not self.sample_rate_hz > 0:
            raise ConfigError("full_scale and sample_rate_hz must be positive")
        if not any(self.coeffs) and self.sigma_common == 0 and self.sigma_device == 0:
            raise ConfigError("degenerate source: no harmonics and no noise")

    @classmethod
    def from_dict(cls, data):
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown source model keys: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))

    def to_dict(self):
        d = asdict(self)
        d["coeffs"] = list(self.coeffs)
        return d

    @property
    def noise_var(self):
        return self.sigma_common**2 + self.sigma_device**2


@dataclass(frozen=True, eq=False)
class Realization:
    """Output of :func:`generate` with the pre-quantization taps kept."""

    streams: list
    analog: np.ndarray
    theta: float
    saturated: list = field(default_factory=list)

    def __iter__(self):
        return iter(self.streams)

    def __len__(self):
        return len(self.streams)

    def __getitem__(self, i):
        return self.streams[i]


def deterministic_part(model, t, theta):
    d = np.zeros_like(t)
    for k, a in enumerate(model.coeffs, start=1):
        d += a * np.cos(2 * np.pi * k * model.fundamental_hz * t + theta)
    return d


def quantize(x, adc_bits, full_scale):
    """Map volts to ADC codes: mid-scale offset, ``full_scale`` spans all codes."""
    top = 2**adc_bits - 1
    codes = np.floor((x / full_scale + 0.5) * 2**adc_bits)
    saturated = int(((codes < 0) | (codes > top)).sum())
    return np.clip(codes, 0, top).astype(np.int64), saturated


def generate(model, n_samples, n_devices=2, start_index=0):
    """Draw one realization observed by ``n_devices`` devices.

    Parameters
    ----------
    model : SourceModel
    n_samples : int
    n_devices : int
    start_index : int
        Absolute index of the first sample (t = start_index / fs), used to
        look at windows at different times of the same realization.

    Returns
    -------
    Realization
        ``streams`` holds one :class:`SampleStream` per device; ``analog``
        the real-valued signals before quantization, shape
        ``(n_devices, n_samples)``.
    """
    n_samples = check_int(n_samples, "n_samples", minimum=1)
    n_devices = check_int(n_devices, "n_devices", minimum=1)
    rng = np.random.default_rng(model.seed)
    theta = rng.uniform(-np.pi, np.pi)
    common_rng, *device_rngs = rng.spawn(n_devices + 1)
    t = (start_index + np.arange(n_samples)) / model.sample_rate_hz
    base = deterministic_part(model, t, theta)
    if model.sigma_common > 0:
        base = base + common_rng.normal(0.0, model.sigma_common, n_samples)
    analog = np.empty((n_devices, n_samples))
    streams, saturated = [], []
    for i, drng in enumerate(device_rngs):
        x = base
        if model.sigma_device > 0:
            x = base + drng.normal(0.0, model.sigma_device, n_samples)
        analog[i] = x
        codes, sat = quantize(x, model.adc_bits, model.full_scale)
        saturated.append(sat)
        streams.append(
            SampleStream(
                codes,
                adc_bits=model.adc_bits,
                sample_rate_hz=model.sample_rate_hz,
                full_scale=model.full_scale,
                meta={"device": i, "saturated": sat},
            )
        )
    return Realization(streams, analog, float(theta), saturated)


def acf_analytic(model, lags):
    """Closed-form autocorrelation at lags ``0..lags``.

    ``alpha_j = sum_k (a_k**2 / 2) cos(2*pi*k*f*j/fs) + noise_var * [j == 0]``.
    """
    lags = check_int(lags, "lags", minimum=1)
    j = np.arange(lags + 1)
    dt = 1.0 / model.sample_rate_hz
    alpha = np.zeros(lags + 1)
    for k, a in enumerate(model.coeffs, start=1):
        alpha += 0.5 * a * a * np.cos(2 * np.pi * k * model.fundamental_hz * j * dt)
    alpha[0] += model.noise_var
    return AcfSequence(alpha)
