"""Noise sweeps, optimum search, the cross-model optimum study, and the adaptive noise controller."""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, NamedTuple, Optional, Sequence

import numpy as np

from . import signals as sig
from .detectors import DetectorSpec, detect
from .errors import DegenerateInputError, InvalidArgumentError, NoOptimumError
from .objectives import (
    BinningSpec,
    ObjectiveSample,
    ac_rms,
    autocorrelation,
    cross_correlation,
    mutual_information,
    pearson_r,
    snr_db,
    success_probability,
)
from .signals import TimeSeries

__all__ = [
    "SignalSpec",
    "SweepConfig",
    "ResonanceCurve",
    "Optimum",
    "ScatterResult",
    "ControllerState",
    "derive_seed",
    "evaluate_point",
    "run_sweep",
    "find_optimum",
    "run_scatter_study",
    "adapt_step",
    "run_controller",
]

OBJECTIVES = ("mi", "ac", "cc", "q", "snr")
SIGNAL_KINDS = ("bipolar", "sine", "roessler", "ou", "audio")

# stream tags for derive_seed
_SIGNAL, _NOISE, _COIN = 1, 2, 3


def derive_seed(*keys: int) -> int:
    """Deterministic 63-bit seed hashed from integer keys."""
    ss = np.random.SeedSequence([int(k) for k in keys])
    return int(ss.generate_state(1, np.uint64)[0] >> np.uint64(1))


@dataclass(frozen=True)
class SignalSpec:
    """Which input generator to use and with what parameters.

    ``params`` holds generator keyword arguments: ``persist_prob`` for bipolar;
    ``freq``/``dt`` for sine; :class:`~srlab.signals.RoesslerParams` fields
    for roessler; :class:`~srlab.signals.OuParams` fields for ou.  Audio uses
    ``path``.  ``amplitude`` rescales the series so its peak equals the value
    (a sine without it has unit amplitude).
    """

    kind: str
    params: dict = field(default_factory=dict)
    amplitude: Optional[float] = None
    path: Optional[str] = None

    def __post_init__(self):
        if self.kind not in SIGNAL_KINDS:
            raise InvalidArgumentError(f"unknown signal kind {self.kind!r}; expected one of {SIGNAL_KINDS}")
        if self.kind == "audio" and not self.path:
            raise InvalidArgumentError("audio signal requires a path")
        if self.amplitude is not None and not self.amplitude > 0:
            raise InvalidArgumentError(f"amplitude must be > 0, got {self.amplitude}")

    @property
    def stochastic(self) -> bool:
        return self.kind in ("bipolar", "ou")

    def generate(self, n: int, seed: int, offset: int = 0) -> TimeSeries:
        """``n`` samples; ``offset`` shifts the start of deterministic sine/audio signals."""
        p = self.params
        if self.kind == "bipolar":
            ts = sig.gen_bipolar(p.get("persist_prob", 0.7), n, seed)
        elif self.kind == "sine":
            dt, freq = p.get("dt", 1e-3), p.get("freq", 5.0)
            if offset == 0:
                ts = sig.gen_sine(freq, 1.0, dt, n)
            else:
                t = (offset + np.arange(n)) * dt
                ts = TimeSeries(np.sin(2.0 * math.pi * freq * t), dt, f"sine(f={freq})")
        elif self.kind == "roessler":
            ts = sig.gen_roessler(sig.RoesslerParams(**p), n)
        elif self.kind == "ou":
            ts = sig.gen_ou(sig.OuParams(**p), n, seed)
        else:
            full = sig.load_audio(self.path)
            start = offset % len(full)
            idx = (start + np.arange(min(n, len(full)))) % len(full)
            ts = TimeSeries(full.samples[idx], full.dt, full.label)
        if self.amplitude is not None:
            ts = sig.normalize_amplitude(ts, self.amplitude)
        return ts


@dataclass(frozen=True)
class SweepConfig:
    signal: SignalSpec
    detector: DetectorSpec
    sigma_grid: tuple[float, ...]
    samples_per_point: int = 100_000
    replicates: int = 1
    master_seed: int = 0
    objectives: tuple[str, ...] = OBJECTIVES
    ac_lags: tuple[int, ...] = (1,)
    mi_bins: int = 32
    common_noise: bool = True
    label: str = ""

    def __post_init__(self):
        grid = tuple(float(s) for s in self.sigma_grid)
        object.__setattr__(self, "sigma_grid", grid)
        if not grid:
            raise InvalidArgumentError("sigma_grid must not be empty")
        if any(s < 0 for s in grid):
            raise InvalidArgumentError("sigma_grid values must be >= 0")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise InvalidArgumentError("sigma_grid must be strictly increasing")
        if self.samples_per_point < 1000:
            raise InvalidArgumentError(f"samples_per_point must be >= 1000, got {self.samples_per_point}")
        if self.replicates < 1:
            raise InvalidArgumentError("replicates must be >= 1")
        unknown = set(self.objectives) - set(OBJECTIVES)
        if unknown:
            raise InvalidArgumentError(f"unknown objectives {sorted(unknown)}")
        if not self.ac_lags or min(self.ac_lags) < 1:
            raise InvalidArgumentError("ac_lags must be a non-empty set of positive integers")

    @property
    def ac_uses_rms(self) -> bool:
        return tuple(self.ac_lags) != (1,)


@dataclass
class ResonanceCurve:
    """Per-sigma objective means and standard errors across replicates.

    ``means``/``ses`` map objective name to arrays aligned with ``sigmas``;
    NaN marks an objective that is absent (inapplicable) at that point.
    ``degenerate`` marks points where every replicate's output was constant.
    """

    sigmas: np.ndarray
    means: dict
    ses: dict
    degenerate: np.ndarray
    config: SweepConfig
    samples: list = field(default_factory=list, repr=False)

    def __len__(self) -> int:
        return self.sigmas.size

    def has(self, objective: str) -> bool:
        return objective in self.means and not np.all(np.isnan(self.means[objective]))


class Optimum(NamedTuple):
    sigma: float
    value: float
    boundary: bool = False


def _is_bipolar(x: np.ndarray) -> bool:
    return bool(np.all(np.abs(x) == 1.0))


def evaluate_point(
    signal: TimeSeries,
    detector: DetectorSpec,
    sigma: float,
    noise_seed: int,
    coin_seed: int,
    objectives: Sequence[str] = OBJECTIVES,
    ac_lags: Sequence[int] = (1,),
    binning: BinningSpec = BinningSpec(),
    stimulus_freq: Optional[float] = None,
) -> tuple[ObjectiveSample, bool]:
    """Run the detector once at noise level ``sigma`` and measure the objectives.

    Returns the sample and whether the output was constant (degenerate AC).
    """
    noise = sig.gen_gaussian_noise(sigma, len(signal), noise_seed)
    y = detect(detector, signal, noise, coin_seed)
    ac1, degenerate = autocorrelation(y, 1, with_flag=True)
    rms = ac_rms(y, ac_lags) if tuple(ac_lags) != (1,) else abs(ac1)
    mi = mutual_information(signal, y, binning) if "mi" in objectives else math.nan
    cc = math.nan
    if "cc" in objectives:
        try:
            cc = cross_correlation(signal, y)
        except DegenerateInputError:
            cc = 0.0
    q_hat = None
    if "q" in objectives and _is_bipolar(signal.samples) and _is_bipolar(y.samples):
        q_hat = success_probability(signal, y)
    snr = None
    if "snr" in objectives and stimulus_freq is not None:
        silent = TimeSeries(np.zeros(len(signal)), signal.dt)
        noise_only = detect(detector, silent, TimeSeries(noise.samples, signal.dt), coin_seed)
        snr = snr_db(TimeSeries(y.samples, signal.dt), noise_only, stimulus_freq)
    return ObjectiveSample(mi, cc, ac1, rms, q_hat, snr), degenerate


def _point_seeds(cfg: SweepConfig, i: int, r: int) -> tuple[int, int]:
    keys = (r,) if cfg.common_noise else (i, r)
    return derive_seed(cfg.master_seed, _NOISE, *keys), derive_seed(cfg.master_seed, _COIN, *keys)


def _thread_count(threads: Optional[int]) -> int:
    return max(1, int(threads or 1))


def run_sweep(config: SweepConfig, threads: Optional[int] = None) -> ResonanceCurve:
    """Evaluate every (sigma, replicate) point of ``config``.

    With ``common_noise`` (the default) every grid point of a replicate reuses
    one unit-variance noise draw scaled by sigma, plus one coin-flip stream;
    seeds derive from ``(master_seed, stream, replicate)`` and the realization
    is independent of the grid.  Otherwise seeds derive from
    ``(master_seed, stream, sigma_index, replicate)``.  Either way the curve
    does not depend on ``threads`` or on evaluation order.
    """
    cfg = config
    n = cfg.samples_per_point
    signals_by_rep = [
        cfg.signal.generate(n, derive_seed(cfg.master_seed, _SIGNAL, r)) for r in range(cfg.replicates)
    ]
    stim = cfg.signal.params.get("freq", 5.0) if cfg.signal.kind == "sine" else None
    binning = BinningSpec(cfg.mi_bins)
    tasks = [(i, r) for i in range(len(cfg.sigma_grid)) for r in range(cfg.replicates)]

    def work(task):
        i, r = task
        return evaluate_point(
            signals_by_rep[r],
            cfg.detector,
            cfg.sigma_grid[i],
            *_point_seeds(cfg, i, r),
            cfg.objectives,
            cfg.ac_lags,
            binning,
            stim,
        )

    nthreads = _thread_count(threads)
    if nthreads > 1:
        with ThreadPoolExecutor(nthreads) as pool:
            results = list(pool.map(work, tasks))
    else:
        results = [work(t) for t in tasks]

    G, R = len(cfg.sigma_grid), cfg.replicates
    grid = [[None] * R for _ in range(G)]
    degen = np.zeros((G, R), dtype=bool)
    for (i, r), (sample, d) in zip(tasks, results):
        grid[i][r] = sample
        degen[i, r] = d

    def column(getter):
        return np.array([[_num(getter(grid[i][r])) for r in range(R)] for i in range(G)])

    ac_get = (lambda s: s.ac_rms) if cfg.ac_uses_rms else (lambda s: s.ac_lag1)
    raw = {
        "mi": column(lambda s: s.mi_bits),
        "ac": column(ac_get),
        "cc": column(lambda s: s.cc),
        "q": column(lambda s: s.q_hat),
        "snr": column(lambda s: s.snr_db),
    }
    means, ses = {}, {}
    for name, vals in raw.items():
        if name not in cfg.objectives:
            vals = np.full_like(vals, math.nan)
        with warnings.catch_warnings(), np.errstate(invalid="ignore"):
            warnings.simplefilter("ignore", RuntimeWarning)
            means[name] = np.nanmean(vals, axis=1) if R > 1 else vals[:, 0]
            if R > 1:
                ses[name] = np.nanstd(vals, axis=1, ddof=1) / math.sqrt(R)
            else:
                ses[name] = np.where(np.isnan(vals[:, 0]), math.nan, 0.0)
    return ResonanceCurve(
        sigmas=np.array(cfg.sigma_grid),
        means=means,
        ses=ses,
        degenerate=degen.all(axis=1),
        config=cfg,
        samples=grid,
    )


def _num(v) -> float:
    return math.nan if v is None else float(v)


def find_optimum(curve: ResonanceCurve, objective: str) -> Optimum:
    """Noise level maximizing ``objective`` on the curve.

    The AC objective is maximized in absolute value and skips points whose
    output was constant.  Ties go to the smaller sigma.  ``boundary`` is set
    when the maximum sits on the first or last grid point.
    """
    if objective not in OBJECTIVES:
        raise InvalidArgumentError(f"unknown objective {objective!r}")
    if len(curve) == 0:
        raise NoOptimumError("empty curve")
    vals = np.array(curve.means[objective], dtype=float)
    score = vals.copy()
    if objective == "ac":
        score = np.abs(score)
        score[curve.degenerate] = math.nan
    finite = ~np.isnan(score)
    if not finite.any():
        raise NoOptimumError(f"objective {objective!r} is absent or degenerate at every grid point")
    idx = int(np.argmax(np.where(finite, score, -np.inf)))
    boundary = len(curve) > 1 and idx in (0, len(curve) - 1)
    return Optimum(float(curve.sigmas[idx]), float(vals[idx]), boundary)


@dataclass
class ScatterResult:
    pairs: list  # (sigma_mi, sigma_ac) per config
    r: float
    boundary: list
    labels: list
    warning: Optional[str] = None


def run_scatter_study(configs: Sequence[SweepConfig], threads: Optional[int] = None) -> ScatterResult:
    """Optimal noise by MI versus by output AC across many models, with their Pearson r.

    A zero-variance optimum set makes r undefined: it is returned as NaN and
    the reason is reported in ``warning`` (and via :mod:`warnings`).
    """
    if len(configs) < 3:
        raise InvalidArgumentError(f"scatter study needs at least 3 configs, got {len(configs)}")
    pairs, flags, labels = [], [], []
    for k, cfg in enumerate(configs):
        curve = run_sweep(cfg, threads)
        o_mi, o_ac = find_optimum(curve, "mi"), find_optimum(curve, "ac")
        pairs.append((o_mi.sigma, o_ac.sigma))
        flags.append(o_mi.boundary or o_ac.boundary)
        labels.append(cfg.label or f"config{k}")
    message = None
    try:
        r = pearson_r([p[0] for p in pairs], [p[1] for p in pairs])
    except DegenerateInputError as exc:
        r = math.nan
        message = f"pearson_r undefined: {exc}"
        warnings.warn(message, RuntimeWarning, stacklevel=2)
    return ScatterResult(pairs, r, flags, labels, message)


@dataclass(frozen=True)
class ControllerState:
    sigma: float
    step: float = 0.1
    ac_estimate: float = math.nan
    iteration: int = 0
    window: int = 10_000
    degenerate_count: int = 0
    decay: float = 0.95
    min_step: float = 1e-3
    smoothing: float = 0.2

    def __post_init__(self):
        if self.sigma < 0:
            raise InvalidArgumentError(f"controller sigma must be >= 0, got {self.sigma}")
        if not self.step > 0:
            raise InvalidArgumentError(f"controller step must be > 0, got {self.step}")


def adapt_step(state: ControllerState, signal_window: TimeSeries, detector: DetectorSpec, seed: int) -> ControllerState:
    """One hill-climbing update of the noise level using only the detector output.

    |AC(lag 1)| is measured at ``sigma`` and ``sigma + step`` with the same
    noise draw and coin flips, sigma moves one step toward the larger value,
    and the step shrinks by ``decay`` down to ``min_step``.
    """
    if len(signal_window) < 1000:
        raise InvalidArgumentError(f"controller window must hold >= 1000 samples, got {len(signal_window)}")
    base = sig.gen_gaussian_noise(1.0, len(signal_window), derive_seed(seed, _NOISE)).samples
    coin = derive_seed(seed, _COIN)

    def probe(s):
        y = detect(detector, signal_window, TimeSeries(s * base, signal_window.dt), coin)
        value, degenerate = autocorrelation(y, 1, with_flag=True)
        return abs(value), degenerate

    here, d_here = probe(state.sigma)
    there, d_there = probe(state.sigma + state.step)
    if d_here and d_there:
        return replace(state, iteration=state.iteration + 1, degenerate_count=state.degenerate_count + 1)
    if there > here:
        sigma, measured = state.sigma + state.step, there
    elif there < here:
        sigma, measured = max(0.0, state.sigma - state.step), here
    else:
        sigma, measured = state.sigma, here
    est = measured if math.isnan(state.ac_estimate) else (
        (1.0 - state.smoothing) * state.ac_estimate + state.smoothing * measured
    )
    return replace(
        state,
        sigma=sigma,
        ac_estimate=est,
        step=max(state.min_step, state.step * state.decay),
        iteration=state.iteration + 1,
    )


def run_controller(
    signal: SignalSpec,
    detector: DetectorSpec,
    initial: ControllerState,
    iterations: int,
    seed: int,
) -> list[ControllerState]:
    """Drive :func:`adapt_step` over consecutive signal windows; returns every state incl. the initial one.

    Stochastic sources draw a fresh window per iteration; sine and audio
    advance through the signal; Roessler reuses one window.
    """
    states = [initial]
    state = initial
    fixed = signal.generate(initial.window, derive_seed(seed, _SIGNAL)) if signal.kind == "roessler" else None
    for it in range(iterations):
        if fixed is not None:
            window = fixed
        else:
            window = signal.generate(initial.window, derive_seed(seed, _SIGNAL, it), offset=it * initial.window)
        state = adapt_step(state, window, detector, derive_seed(seed, it))
        states.append(state)
    return states
