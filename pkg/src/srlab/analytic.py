"""Closed-form bipolar sensor model.

A bipolar input ``s_t`` (persistence probability ``q``) plus zero-mean
Gaussian noise of standard deviation ``sigma`` passes through symmetric
thresholds ``+-theta`` (``theta > 1``); sub-threshold inputs produce a fair
coin flip.  All objectives are functions of the success probability
``Q = P(y_t == s_t)``.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import erf

from .errors import OutOfModelError

__all__ = [
    "w_func",
    "analytic_q",
    "analytic_sigma_opt",
    "analytic_mi",
    "analytic_cc",
    "analytic_ac",
    "input_ac_bipolar",
]


def w_func(x):
    """Gaussian mass between 0 and ``x`` standard deviations: ``erf(x/sqrt 2)/2``."""
    w = 0.5 * erf(np.asarray(x, dtype=float) / math.sqrt(2.0))
    return float(w) if w.ndim == 0 else w


def _check_theta(theta: float) -> None:
    if not theta > 1:
        raise OutOfModelError(f"analytic model requires theta > 1, got {theta}")


def analytic_q(theta: float, sigma):
    """Success probability ``1/2 + 1/2 [W((theta+1)/sigma) - W((theta-1)/sigma)]``.

    ``sigma == 0`` returns the limit 1/2.  Accepts scalar or array ``sigma``.
    """
    _check_theta(theta)
    sig = np.asarray(sigma, dtype=float)
    if np.any(sig < 0):
        raise OutOfModelError("sigma must be >= 0")
    with np.errstate(divide="ignore", invalid="ignore"):
        q = 0.5 + 0.5 * (w_func((theta + 1.0) / sig) - w_func((theta - 1.0) / sig))
    q = np.where(sig == 0.0, 0.5, q)
    return float(q) if q.ndim == 0 else q


def analytic_sigma_opt(theta: float) -> float:
    """Noise level maximizing :func:`analytic_q`: ``sqrt(2 theta / ln((theta+1)/(theta-1)))``."""
    _check_theta(theta)
    return math.sqrt(2.0 * theta / math.log((theta + 1.0) / (theta - 1.0)))


def _xlog2x(p):
    p = np.asarray(p, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(p > 0, p * np.log2(np.where(p > 0, p, 1.0)), 0.0)


def analytic_mi(q_success):
    """``1 + Q log2 Q + (1-Q) log2 (1-Q)`` bits, with ``0 log 0 := 0``."""
    q = np.asarray(q_success, dtype=float)
    mi = 1.0 + _xlog2x(q) + _xlog2x(1.0 - q)
    mi = np.clip(mi, 0.0, 1.0)
    return float(mi) if mi.ndim == 0 else mi


def analytic_cc(q_success):
    return 2.0 * q_success - 1.0


def analytic_ac(q_success, c_ss: float):
    """Lag-1 output autocorrelation ``c_ss * (1 - 4 Q (1-Q))``; keeps the sign of ``c_ss``."""
    return c_ss * (1.0 - 4.0 * q_success * (1.0 - q_success))


def input_ac_bipolar(persist_prob: float) -> float:
    """Lag-1 autocorrelation ``2q - 1`` of a symmetric bipolar Markov chain."""
    return 2.0 * persist_prob - 1.0
