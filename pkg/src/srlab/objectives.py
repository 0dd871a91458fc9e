"""Objective functions measured on recorded signal/output series.

MI, lag-0 cross-correlation, output autocorrelation (single lag and RMS over
lags), success probability, spectral SNR, and a plain Pearson coefficient
for comparing optima across models.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy.signal import welch

from .errors import DegenerateInputError, InvalidArgumentError
from .signals import TimeSeries

__all__ = [
    "ObjectiveSample",
    "BinningSpec",
    "mutual_information",
    "cross_correlation",
    "autocorrelation",
    "ac_rms",
    "success_probability",
    "snr_db",
    "snr_from_spectra",
    "pearson_r",
]

SNR_SEGMENT = 4096


@dataclass(frozen=True)
class ObjectiveSample:
    mi_bits: float
    cc: float
    ac_lag1: float
    ac_rms: float
    q_hat: Optional[float] = None
    snr_db: Optional[float] = None


@dataclass(frozen=True)
class BinningSpec:
    """Histogram binning for the MI estimator.

    Variables with at most ``bins`` distinct values are binned by exact value;
    others get ``bins`` equal-width bins over ``range`` (observed min/max if None).
    """

    bins: int = 32
    range: Optional[tuple[float, float]] = None

    def __post_init__(self):
        if self.bins < 2:
            raise InvalidArgumentError(f"bins must be >= 2, got {self.bins}")
        if self.range is not None and not self.range[0] < self.range[1]:
            raise InvalidArgumentError(f"binning range must satisfy lo < hi, got {self.range}")


def _values(x) -> np.ndarray:
    return np.asarray(x.samples if isinstance(x, TimeSeries) else x, dtype=float)


def _pair(a, b) -> tuple[np.ndarray, np.ndarray]:
    a, b = _values(a), _values(b)
    if a.shape != b.shape:
        raise InvalidArgumentError(f"series lengths differ ({a.size} vs {b.size})")
    if a.size < 2:
        raise InvalidArgumentError("need at least 2 samples")
    return a, b


def _constant(x: np.ndarray) -> bool:
    # exact test: a float mean can leave ~1e-16 residuals on a constant series
    return bool(np.all(x == x[0]))


def _codes(x: np.ndarray, binning: BinningSpec) -> np.ndarray:
    uniq, inverse = np.unique(x, return_inverse=True)
    if uniq.size <= binning.bins:
        return inverse
    lo, hi = binning.range if binning.range is not None else (x.min(), x.max())
    idx = np.floor((x - lo) / (hi - lo) * binning.bins).astype(np.int64)
    return np.clip(idx, 0, binning.bins - 1)


def _entropy_bits(counts: np.ndarray, n: int) -> float:
    # sorted so the sum does not depend on how categories were enumerated
    c = np.sort(counts[counts > 0]).astype(float)
    p = c / n
    return float(-np.sum(p * np.log2(p)))


def mutual_information(s, y, binning: BinningSpec = BinningSpec()) -> float:
    """Plug-in histogram estimate of I(S;Y) in bits."""
    s, y = _pair(s, y)
    cs, cy = _codes(s, binning), _codes(y, binning)
    n = s.size
    ny = int(cy.max()) + 1
    joint = np.bincount(cs * ny + cy)
    h_s = _entropy_bits(np.bincount(cs), n)
    h_y = _entropy_bits(np.bincount(cy), n)
    return max(0.0, h_s + h_y - _entropy_bits(joint, n))


def cross_correlation(s, y) -> float:
    """Normalized lag-0 cross-correlation (Pearson) of stimulus and response."""
    s, y = _pair(s, y)
    if _constant(s) or _constant(y):
        raise DegenerateInputError("cross-correlation undefined for a zero-variance series")
    ds, dy = s - s.mean(), y - y.mean()
    den = math.sqrt(float(np.dot(ds, ds)) * float(np.dot(dy, dy)))
    return max(-1.0, min(1.0, float(np.dot(ds, dy)) / den))


def autocorrelation(y, lag: int = 1, *, with_flag: bool = False):
    """Normalized autocorrelation at ``lag``.

    The numerator averages the ``len - lag`` overlapping products, the
    denominator is the full-series variance.  A constant series yields 0;
    pass ``with_flag=True`` to get ``(value, degenerate)`` instead.
    """
    y = _values(y)
    if lag < 1:
        raise InvalidArgumentError(f"lag must be a positive integer, got {lag}")
    if y.size <= lag:
        raise InvalidArgumentError(f"series of length {y.size} too short for lag {lag}")
    if _constant(y):
        return (0.0, True) if with_flag else 0.0
    d = y - y.mean()
    var = float(np.dot(d, d)) / y.size
    value = float(np.dot(d[lag:], d[:-lag])) / (y.size - lag) / var
    return (value, False) if with_flag else value


def ac_rms(y, lags: Iterable[int]) -> float:
    """Root mean square of the autocorrelation over a set of lags."""
    lags = sorted(set(int(k) for k in lags))
    if not lags:
        raise InvalidArgumentError("lag set must be non-empty")
    vals = np.array([autocorrelation(y, k) for k in lags])
    return float(np.sqrt(np.mean(vals**2)))


def success_probability(s, y) -> float:
    """Fraction of samples where the bipolar output equals the bipolar input."""
    s, y = _pair(s, y)
    for name, v in (("signal", s), ("output", y)):
        if not np.all((v == 1.0) | (v == -1.0)):
            raise InvalidArgumentError(f"{name} is not bipolar (values outside {{-1, +1}})")
    return float(np.mean(s == y))


def snr_from_spectra(freqs: np.ndarray, p_joint: np.ndarray, p_noise: np.ndarray, stimulus_freq: float) -> float:
    """SNR in dB from a joint-run PSD and a noise-only PSD on the same frequency grid.

    Signal power is the area of the 3 bins centred on the stimulus frequency
    above the joint spectrum's local floor (median of bins 3..10 away on both
    sides).  The noise term is the mean noise-only density over those 3 bins.
    """
    freqs = np.asarray(freqs, dtype=float)
    p_joint = np.asarray(p_joint, dtype=float)
    p_noise = np.asarray(p_noise, dtype=float)
    df = freqs[1] - freqs[0]
    if not 0 < stimulus_freq <= freqs[-1]:
        raise InvalidArgumentError(f"stimulus frequency {stimulus_freq} outside (0, {freqs[-1]}]")
    k = int(round((stimulus_freq - freqs[0]) / df))
    peak = slice(max(k - 1, 0), min(k + 2, freqs.size))
    side = np.r_[max(k - 10, 0):max(k - 2, 0), min(k + 3, freqs.size):min(k + 11, freqs.size)]
    floor = float(np.median(p_joint[side])) if side.size else 0.0
    signal_power = float(np.sum(p_joint[peak] - floor)) * df
    noise_density = float(np.mean(p_noise[peak]))
    if noise_density <= 0.0:
        return math.inf
    if signal_power <= 0.0:
        return -math.inf
    return 10.0 * math.log10(signal_power / noise_density)


def snr_db(y: TimeSeries, noise_only: TimeSeries, stimulus_freq: float) -> float:
    """Output SNR at the stimulus frequency (Welch PSD, Hann window, 50% overlap).

    ``noise_only`` is the detector response to the noise presented alone.
    Returns ``inf`` when the noise-only density vanishes at the stimulus frequency.
    """
    if len(y) != len(noise_only) or y.dt != noise_only.dt:
        raise InvalidArgumentError("joint and noise-only runs must share length and dt")
    fs = 1.0 / y.dt
    if not 0 < stimulus_freq < fs / 2:
        raise InvalidArgumentError(f"stimulus frequency {stimulus_freq} Hz not below Nyquist {fs / 2} Hz")
    nperseg = min(SNR_SEGMENT, len(y))
    kw = dict(fs=fs, window="hann", nperseg=nperseg, noverlap=nperseg // 2)
    freqs, p_joint = welch(y.samples, **kw)
    _, p_noise = welch(noise_only.samples, **kw)
    return snr_from_spectra(freqs, p_joint, p_noise, stimulus_freq)


def pearson_r(xs: Sequence[float], ys: Sequence[float]) -> float:
    xs, ys = _pair(xs, ys)
    if _constant(xs) or _constant(ys):
        raise DegenerateInputError("Pearson r undefined: zero variance in one of the inputs")
    dx, dy = xs - xs.mean(), ys - ys.mean()
    den = math.sqrt(float(np.dot(dx, dx)) * float(np.dot(dy, dy)))
    return max(-1.0, min(1.0, float(np.dot(dx, dy)) / den))
