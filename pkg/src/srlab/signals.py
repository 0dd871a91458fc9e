"""Input signals and noise: bipolar chain, sine, Roessler, Ornstein-Uhlenbeck, WAV audio.

Every stochastic generator takes an integer seed and is a pure function of
``(parameters, seed)``.  Streams are built from :class:`numpy.random.SeedSequence`
so that independent streams can be derived from a tuple of integer keys, e.g.
``(master_seed, sigma_index, replicate)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from scipy.io import wavfile
from scipy.signal import lfilter

from .errors import (
    AudioFormatError,
    DegenerateInputError,
    InvalidArgumentError,
    NumericOverflowError,
)

__all__ = [
    "TimeSeries",
    "RoesslerParams",
    "OuParams",
    "make_rng",
    "gen_bipolar",
    "gen_sine",
    "gen_roessler",
    "gen_ou",
    "load_audio",
    "gen_gaussian_noise",
    "normalize_amplitude",
    "rk4_integrate",
]


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """Uniformly sampled real series.  The sample buffer is read-only."""

    samples: np.ndarray
    dt: float = 1.0
    label: str = ""

    def __post_init__(self):
        arr = np.array(self.samples, dtype=float)
        if arr.ndim != 1:
            raise InvalidArgumentError(f"samples must be 1-D, got shape {arr.shape}")
        if not self.dt > 0:
            raise InvalidArgumentError(f"dt must be > 0, got {self.dt}")
        arr.setflags(write=False)
        object.__setattr__(self, "samples", arr)

    def __len__(self) -> int:
        return self.samples.shape[0]

    def __array__(self, dtype=None, copy=None):
        return self.samples if dtype is None else self.samples.astype(dtype)


@dataclass(frozen=True)
class RoesslerParams:
    a: float = 0.15
    b: float = 0.2
    c: float = 7.1
    dt: float = 0.01
    initial_state: tuple[float, float, float] = (1.0, 1.0, 0.0)
    transient_steps: int = 10_000

    def __post_init__(self):
        if not self.dt > 0:
            raise InvalidArgumentError(f"Roessler dt must be > 0, got {self.dt}")
        if self.transient_steps < 0:
            raise InvalidArgumentError("transient_steps must be >= 0")
        object.__setattr__(self, "initial_state", tuple(float(v) for v in self.initial_state))


@dataclass(frozen=True)
class OuParams:
    tau: float = 1.0
    eps: float = 1.0
    dt: float = 0.01
    initial_x: float = 0.0

    def __post_init__(self):
        if not self.tau > 0:
            raise InvalidArgumentError(f"OU tau must be > 0, got {self.tau}")
        if not self.dt > 0:
            raise InvalidArgumentError(f"OU dt must be > 0, got {self.dt}")
        if self.eps < 0:
            raise InvalidArgumentError(f"OU eps must be >= 0, got {self.eps}")


def make_rng(*keys: int) -> np.random.Generator:
    """Independent generator for the stream identified by ``keys`` (non-negative ints)."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(k) for k in keys])))


def _check_n(n: int) -> None:
    if n < 1:
        raise InvalidArgumentError(f"n must be >= 1, got {n}")


def gen_bipolar(persist_prob: float, n: int, seed: int) -> TimeSeries:
    """Two-state Markov chain on {-1, +1} with ``P(s_t == s_{t-1}) = persist_prob``."""
    if not 0.0 <= persist_prob <= 1.0:
        raise InvalidArgumentError(f"persist_prob must lie in [0, 1], got {persist_prob}")
    _check_n(n)
    rng = make_rng(seed)
    first = 1.0 if rng.random() < 0.5 else -1.0
    steps = np.where(rng.random(n - 1) < persist_prob, 1.0, -1.0)
    samples = first * np.concatenate(([1.0], np.cumprod(steps)))
    return TimeSeries(samples, 1.0, f"bipolar(q={persist_prob})")


def gen_sine(freq: float, amplitude: float, dt: float, n: int) -> TimeSeries:
    if not freq > 0:
        raise InvalidArgumentError(f"freq must be > 0, got {freq}")
    if not dt > 0:
        raise InvalidArgumentError(f"dt must be > 0, got {dt}")
    _check_n(n)
    t = np.arange(n) * dt
    return TimeSeries(amplitude * np.sin(2.0 * np.pi * freq * t), dt, f"sine(f={freq})")


def rk4_integrate(
    f: Callable[[Sequence[float]], Sequence[float]],
    y0: Sequence[float],
    dt: float,
    n_steps: int,
) -> list[tuple[float, ...]]:
    """Classical fixed-step RK4 for an autonomous system ``y' = f(y)``.

    Returns the ``n_steps + 1`` states including ``y0``.  Plain float tuples
    are used because small state vectors are much faster than numpy here.
    """
    y = tuple(float(v) for v in y0)
    out = [y]
    half = 0.5 * dt
    sixth = dt / 6.0
    for step in range(1, n_steps + 1):
        try:
            k1 = f(y)
            k2 = f([yi + half * ki for yi, ki in zip(y, k1)])
            k3 = f([yi + half * ki for yi, ki in zip(y, k2)])
            k4 = f([yi + dt * ki for yi, ki in zip(y, k3)])
            y = tuple(
                yi + sixth * (a + 2.0 * b + 2.0 * c + d)
                for yi, a, b, c, d in zip(y, k1, k2, k3, k4)
            )
        except OverflowError:
            y = (math.inf,)
        if not all(map(math.isfinite, y)):
            raise NumericOverflowError(f"non-finite state at integration step {step}")
        out.append(y)
    return out


@lru_cache(maxsize=32)
def _roessler_x(params: RoesslerParams, n: int) -> np.ndarray:
    a, b, c = params.a, params.b, params.c

    def rhs(s):
        x, y, z = s
        return (-(y + z), x + a * y, b + (x - c) * z)

    states = rk4_integrate(rhs, params.initial_state, params.dt, params.transient_steps + n - 1)
    x = np.fromiter((s[0] for s in states[params.transient_steps:]), dtype=float, count=n)
    x.setflags(write=False)
    return x


def gen_roessler(params: RoesslerParams, n: int) -> TimeSeries:
    """x-component of the Roessler system after ``params.transient_steps`` discarded steps."""
    _check_n(n)
    return TimeSeries(_roessler_x(params, n), params.dt, f"roessler(a={params.a},b={params.b},c={params.c})")


def gen_ou(params: OuParams, n: int, seed: int) -> TimeSeries:
    """Ornstein-Uhlenbeck path ``dx = -x/tau dt + eps dW`` via its exact AR(1) transition."""
    _check_n(n)
    decay = math.exp(-params.dt / params.tau)
    scale = math.sqrt(params.eps**2 * params.tau / 2.0 * (1.0 - decay**2))
    drive = np.empty(n)
    drive[0] = params.initial_x
    drive[1:] = scale * make_rng(seed).standard_normal(n - 1)
    samples = lfilter([1.0], [1.0, -decay], drive)
    return TimeSeries(samples, params.dt, f"ou(tau={params.tau},eps={params.eps})")


def load_audio(path: str | Path) -> TimeSeries:
    """Read a mono PCM/float WAV file, scaled to [-1, 1]."""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"audio file not found: {path}")
    try:
        rate, data = wavfile.read(path)
    except ValueError as exc:
        raise AudioFormatError(f"{path}: unsupported WAV encoding ({exc})") from exc
    if data.ndim != 1:
        raise AudioFormatError(f"{path}: expected mono audio, got channels={data.shape[1]}")
    if data.size == 0:
        raise AudioFormatError(f"{path}: no samples")
    kind = data.dtype.kind
    if kind == "f":
        samples = np.clip(data.astype(float), -1.0, 1.0)
    elif kind == "u":
        # 8-bit PCM is offset binary
        half = 2.0 ** (8 * data.dtype.itemsize - 1)
        samples = (data.astype(float) - half) / half
    elif kind == "i":
        # scipy left-justifies 24-bit PCM into int32
        samples = data.astype(float) / 2.0 ** (8 * data.dtype.itemsize - 1)
    else:
        raise AudioFormatError(f"{path}: unsupported sample dtype={data.dtype}")
    return TimeSeries(samples, 1.0 / rate, f"audio({path.name})")


def gen_gaussian_noise(sigma: float, n: int, seed: int) -> TimeSeries:
    if sigma < 0:
        raise InvalidArgumentError(f"sigma must be >= 0, got {sigma}")
    _check_n(n)
    return TimeSeries(sigma * make_rng(seed).standard_normal(n), 1.0, f"gauss(sigma={sigma})")


def normalize_amplitude(ts: TimeSeries, target_amp: float) -> TimeSeries:
    """Rescale so that ``max |sample| == target_amp``."""
    peak = float(np.max(np.abs(ts.samples)))
    if peak == 0.0:
        raise DegenerateInputError("cannot normalize an all-zero series")
    if peak == target_amp:
        return ts
    return TimeSeries(ts.samples * (target_amp / peak), ts.dt, ts.label)
