"""Threshold detectors: four memoryless transfer functions and a leaky integrate-and-fire neuron."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import InvalidArgumentError, WrongOperationError
from .signals import TimeSeries, make_rng

__all__ = ["DetectorSpec", "MEMORYLESS_KINDS", "apply_memoryless", "run_lif", "detect"]

MEMORYLESS_KINDS = (
    "discrete_symmetric",
    "discrete_asymmetric",
    "continuous_symmetric",
    "continuous_asymmetric",
)
KINDS = MEMORYLESS_KINDS + ("lif",)


@dataclass(frozen=True)
class DetectorSpec:
    """Detector kind plus its threshold; ``tau_m``/``dt``/``x_rest`` apply to ``lif`` only."""

    kind: str
    theta: float
    tau_m: Optional[float] = None
    dt: Optional[float] = None
    x_rest: Optional[float] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidArgumentError(f"unknown detector kind {self.kind!r}; expected one of {KINDS}")
        if not self.theta > 0:
            raise InvalidArgumentError(f"theta must be > 0, got {self.theta}")
        lif_fields = {"tau_m": self.tau_m, "dt": self.dt}
        if self.kind == "lif":
            for name, value in lif_fields.items():
                if value is None or not value > 0:
                    raise InvalidArgumentError(f"lif detector requires {name} > 0, got {value}")
            if self.x_rest is None:
                object.__setattr__(self, "x_rest", 0.0)
        else:
            extra = [k for k, v in {**lif_fields, "x_rest": self.x_rest}.items() if v is not None]
            if extra:
                raise InvalidArgumentError(f"{', '.join(extra)} only apply to lif detectors")

    @property
    def symmetric(self) -> bool:
        return self.kind.endswith("_symmetric")

    @property
    def bipolar_output(self) -> bool:
        return self.kind == "discrete_symmetric"


def _check_lengths(signal: TimeSeries, noise: TimeSeries) -> None:
    if len(signal) != len(noise):
        raise InvalidArgumentError(
            f"signal and noise lengths differ ({len(signal)} vs {len(noise)})"
        )


def apply_memoryless(spec: DetectorSpec, signal: TimeSeries, noise: TimeSeries, seed: int = 0) -> TimeSeries:
    """Per-sample transfer function applied to ``signal + noise``.

    Only ``discrete_symmetric`` consumes ``seed``: sub-threshold inputs there
    produce a fair coin flip on {-1, +1}.
    """
    if spec.kind == "lif":
        raise WrongOperationError("apply_memoryless called with a lif detector; use run_lif")
    _check_lengths(signal, noise)
    x = signal.samples + noise.samples
    theta = spec.theta
    if spec.kind == "continuous_symmetric":
        y = np.where(x > theta, x - theta, np.where(x < -theta, x + theta, 0.0))
    elif spec.kind == "continuous_asymmetric":
        y = np.where(x >= theta, x - theta, 0.0)
    elif spec.kind == "discrete_asymmetric":
        y = np.where(x >= theta, 1.0, 0.0)
    else:
        coin = np.where(make_rng(seed).random(x.shape[0]) < 0.5, 1.0, -1.0)
        y = np.where(x > theta, 1.0, np.where(x < -theta, -1.0, coin))
    return TimeSeries(y, signal.dt, f"{spec.kind}(theta={theta})")


def run_lif(spec: DetectorSpec, signal: TimeSeries, noise: TimeSeries, return_membrane: bool = False):
    """Leaky integrate-and-fire neuron driven by ``signal + noise``.

    The membrane obeys ``x' = -x/tau_m + input`` with the input held constant
    over each step, so the update is exact:
    ``x <- x*exp(-dt/tau_m) + input*tau_m*(1 - exp(-dt/tau_m))``.
    A spike (output 1) is emitted at the first sample where ``x >= theta``,
    after which ``x`` is reset to ``x_rest``.

    With ``return_membrane=True`` the post-reset membrane trace is returned too.
    """
    if spec.kind != "lif":
        raise WrongOperationError(f"run_lif requires a lif detector, got {spec.kind!r}")
    _check_lengths(signal, noise)
    decay = math.exp(-spec.dt / spec.tau_m)
    gain = spec.tau_m * (1.0 - decay)
    drive = ((signal.samples + noise.samples) * gain).tolist()
    theta, x_rest = spec.theta, spec.x_rest
    spikes = np.zeros(len(drive))
    membrane = np.empty(len(drive)) if return_membrane else None
    x = x_rest
    for t, d in enumerate(drive):
        x = x * decay + d
        if x >= theta:
            spikes[t] = 1.0
            x = x_rest
        if membrane is not None:
            membrane[t] = x
    out = TimeSeries(spikes, spec.dt, f"lif(theta={theta},tau_m={spec.tau_m})")
    if return_membrane:
        return out, TimeSeries(membrane, spec.dt, "membrane")
    return out


def detect(spec: DetectorSpec, signal: TimeSeries, noise: TimeSeries, seed: int = 0) -> TimeSeries:
    """Dispatch to :func:`run_lif` or :func:`apply_memoryless` by detector kind."""
    if spec.kind == "lif":
        return run_lif(spec, signal, noise)
    return apply_memoryless(spec, signal, noise, seed)
