"""YAML experiment configuration: parsing, validation, and conversion to library objects.

Validation errors carry the line number of the offending key so the CLI can
point at it.  Unknown keys are rejected everywhere.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Optional

import numpy as np
import yaml

from .detectors import DetectorSpec
from .errors import ConfigError, SRLabError
from .resonance import OBJECTIVES, ControllerState, SignalSpec, SweepConfig
from .signals import OuParams, RoesslerParams

SIGNAL_KEYS = {
    "bipolar": {"persist_prob"},
    "sine": {"freq", "dt"},
    "roessler": {"a", "b", "c", "dt", "initial_state", "transient_steps"},
    "ou": {"tau", "eps", "dt", "initial_x"},
    "audio": set(),
}
DETECTOR_KEYS = {"kind", "theta", "tau_m", "dt", "x_rest"}
SWEEP_KEYS = {
    "sigma_grid", "sigma_min", "sigma_max", "sigma_step", "samples_per_point",
    "replicates", "seed", "objectives", "ac_lags", "mi_bins", "common_noise",
}
CONTROLLER_KEYS = {"sigma0", "step", "iterations", "window", "decay", "min_step", "smoothing", "seed"}
OUTPUT_KEYS = {"path"}


class _Doc:
    """Parsed YAML plus a map from key path to source line (1-based)."""

    def __init__(self, data: Any, lines: dict, base_dir: Path):
        self.data = data
        self.lines = lines
        self.base_dir = base_dir

    def line(self, *path) -> Optional[int]:
        while path:
            if path in self.lines:
                return self.lines[path]
            path = path[:-1]
        return self.lines.get((), None)

    def fail(self, message: str, *path):
        raise ConfigError(message, self.line(*path))


def _index_lines(node, path=(), out=None) -> dict:
    out = {} if out is None else out
    out.setdefault(path, node.start_mark.line + 1)
    if isinstance(node, yaml.MappingNode):
        for key, value in node.value:
            sub = path + (key.value,)
            out[sub] = key.start_mark.line + 1
            _index_lines(value, sub, out)
    elif isinstance(node, yaml.SequenceNode):
        for i, item in enumerate(node.value):
            _index_lines(item, path + (i,), out)
    return out


def load_document(path: str | Path) -> _Doc:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        node = yaml.compose(text, Loader=yaml.SafeLoader)
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ConfigError(f"YAML syntax error: {getattr(exc, 'problem', exc)}", mark.line + 1 if mark else None) from exc
    if not isinstance(data, dict):
        raise ConfigError("config must be a mapping at top level", 1)
    return _Doc(data, _index_lines(node), path.parent)


def _mapping(doc: _Doc, value, allowed: set, *path) -> dict:
    if value is None:
        return {}
    if not isinstance(value, dict):
        doc.fail(f"'{'.'.join(map(str, path))}' must be a mapping", *path)
    for key in value:
        if key not in allowed:
            doc.fail(f"unknown key '{key}' in '{'.'.join(map(str, path)) or 'top level'}'", *path, key)
    return value


def _number(doc, section: dict, key: str, *path, default=None, kind=float, positive=False, nonneg=False):
    if key not in section:
        if default is None:
            doc.fail(f"missing required key '{key}'", *path)
        return default
    value = section[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)) or (kind is int and not float(value).is_integer()):
        doc.fail(f"'{key}' must be {'an integer' if kind is int else 'a number'}, got {value!r}", *path, key)
    value = kind(value)
    if positive and not value > 0:
        doc.fail(f"'{key}' must be > 0, got {value}", *path, key)
    if nonneg and value < 0:
        doc.fail(f"'{key}' must be >= 0, got {value}", *path, key)
    return value


def parse_signal(doc: _Doc, raw, *path) -> SignalSpec:
    if not isinstance(raw, dict) or "kind" not in raw:
        doc.fail("signal section needs a 'kind'", *path)
    kind = raw["kind"]
    if kind not in SIGNAL_KEYS:
        doc.fail(f"unknown signal kind {kind!r}; expected one of {sorted(SIGNAL_KEYS)}", *path, "kind")
    allowed = SIGNAL_KEYS[kind] | {"kind", "amplitude"} | ({"path"} if kind == "audio" else set())
    raw = _mapping(doc, raw, allowed, *path)
    params = {k: v for k, v in raw.items() if k in SIGNAL_KEYS[kind]}
    for k, v in params.items():
        if k == "initial_state":
            if not (isinstance(v, list) and len(v) == 3):
                doc.fail("'initial_state' must be a list of 3 numbers", *path, k)
        else:
            params[k] = _number(doc, raw, k, *path, kind=int if k == "transient_steps" else float)
    audio_path = None
    if kind == "audio":
        if "path" not in raw:
            doc.fail("audio signal requires 'path'", *path)
        audio_path = Path(raw["path"])
        if not audio_path.is_absolute():
            audio_path = doc.base_dir / audio_path
        audio_path = str(audio_path)
    amplitude = _number(doc, raw, "amplitude", *path, positive=True) if "amplitude" in raw else None
    try:
        spec = SignalSpec(kind, params, amplitude, audio_path)
        # validate generator parameters eagerly
        if kind == "roessler":
            RoesslerParams(**params)
        elif kind == "ou":
            OuParams(**params)
        elif kind == "bipolar" and not 0 <= params.get("persist_prob", 0.7) <= 1:
            doc.fail("'persist_prob' must lie in [0, 1]", *path, "persist_prob")
        elif kind == "sine":
            for k in ("freq", "dt"):
                if k in params and not params[k] > 0:
                    doc.fail(f"'{k}' must be > 0", *path, k)
    except SRLabError as exc:
        if isinstance(exc, ConfigError):
            raise
        doc.fail(str(exc), *path)
    return spec


def parse_detector(doc: _Doc, raw, *path) -> DetectorSpec:
    raw = _mapping(doc, raw, DETECTOR_KEYS, *path)
    if "kind" not in raw:
        doc.fail("detector section needs a 'kind'", *path)
    theta = _number(doc, raw, "theta", *path, positive=True)
    extra = {k: _number(doc, raw, k, *path) for k in ("tau_m", "dt", "x_rest") if k in raw}
    try:
        return DetectorSpec(raw["kind"], theta, **extra)
    except SRLabError as exc:
        doc.fail(str(exc), *path)


def _sigma_grid(doc: _Doc, raw: dict, *path) -> tuple:
    if "sigma_grid" in raw:
        grid = raw["sigma_grid"]
        if not isinstance(grid, list) or not grid:
            doc.fail("'sigma_grid' must be a non-empty list", *path, "sigma_grid")
        if any(isinstance(s, bool) or not isinstance(s, (int, float)) for s in grid):
            doc.fail("'sigma_grid' entries must be numbers", *path, "sigma_grid")
        if any(b <= a for a, b in zip(grid, grid[1:])) or min(grid) < 0:
            doc.fail("'sigma_grid' must be non-negative and strictly increasing", *path, "sigma_grid")
        return tuple(float(s) for s in grid)
    lo = _number(doc, raw, "sigma_min", *path, nonneg=True)
    hi = _number(doc, raw, "sigma_max", *path, nonneg=True)
    step = _number(doc, raw, "sigma_step", *path, positive=True)
    if hi < lo:
        doc.fail("'sigma_max' must be >= 'sigma_min'", *path, "sigma_max")
    count = int(np.floor((hi - lo) / step + 1e-9)) + 1
    return tuple(float(np.round(lo + k * step, 10)) for k in range(count))


def parse_sweep(doc: _Doc, signal: SignalSpec, detector: DetectorSpec, raw, seed: int, label: str = "", *path) -> SweepConfig:
    raw = _mapping(doc, raw, SWEEP_KEYS, *path)
    grid = _sigma_grid(doc, raw, *path)
    n = _number(doc, raw, "samples_per_point", *path, default=100_000, kind=int)
    if n < 1000:
        doc.fail(f"'samples_per_point' must be >= 1000, got {n}", *path, "samples_per_point")
    reps = _number(doc, raw, "replicates", *path, default=1, kind=int)
    if reps < 1:
        doc.fail("'replicates' must be >= 1", *path, "replicates")
    seed = _number(doc, raw, "seed", *path, default=seed, kind=int, nonneg=True)
    objectives = raw.get("objectives", list(OBJECTIVES))
    if not isinstance(objectives, list) or any(o not in OBJECTIVES for o in objectives):
        doc.fail(f"'objectives' must be a list drawn from {list(OBJECTIVES)}", *path, "objectives")
    lags = raw.get("ac_lags", [1])
    if not isinstance(lags, list) or not lags or any(not isinstance(k, int) or isinstance(k, bool) or k < 1 for k in lags):
        doc.fail("'ac_lags' must be a non-empty list of positive integers", *path, "ac_lags")
    bins = _number(doc, raw, "mi_bins", *path, default=32, kind=int)
    if bins < 2:
        doc.fail("'mi_bins' must be >= 2", *path, "mi_bins")
    common = raw.get("common_noise", True)
    if not isinstance(common, bool):
        doc.fail("'common_noise' must be true or false", *path, "common_noise")
    return SweepConfig(
        signal, detector, grid, n, reps, seed, tuple(objectives), tuple(lags), bins, common, label
    )


def _top_seed(doc: _Doc, seed_override: Optional[int]) -> int:
    if seed_override is not None:
        return seed_override
    return _number(doc, doc.data, "seed", default=0, kind=int, nonneg=True)


def _override(cfg: SweepConfig, seed: Optional[int]) -> SweepConfig:
    return cfg if seed is None else replace(cfg, master_seed=seed)


def load_sweep_config(path, seed: Optional[int] = None) -> tuple[SweepConfig, Optional[str]]:
    """Sweep config and the output path it names (if any)."""
    doc = load_document(path)
    _mapping(doc, doc.data, {"signal", "detector", "sweep", "controller", "output", "seed"})
    for key in ("signal", "detector", "sweep"):
        if key not in doc.data:
            doc.fail(f"missing required section '{key}'")
    signal = parse_signal(doc, doc.data["signal"], "signal")
    detector = parse_detector(doc, doc.data["detector"], "detector")
    cfg = parse_sweep(doc, signal, detector, doc.data["sweep"], _top_seed(doc, None), "", "sweep")
    return _override(cfg, seed), _output_path(doc)


def _output_path(doc: _Doc) -> Optional[str]:
    out = _mapping(doc, doc.data.get("output"), OUTPUT_KEYS, "output")
    return out.get("path")


def load_study_config(path, seed: Optional[int] = None) -> tuple[list[SweepConfig], Optional[str]]:
    """Scatter-study config: shared ``defaults`` merged into each entry of ``configs``."""
    doc = load_document(path)
    _mapping(doc, doc.data, {"defaults", "configs", "output", "seed"})
    defaults = _mapping(doc, doc.data.get("defaults"), {"signal", "detector", "sweep"}, "defaults")
    entries = doc.data.get("configs")
    if not isinstance(entries, list):
        doc.fail("'configs' must be a list of study entries")
    if len(entries) < 3:
        doc.fail(f"scatter study needs at least 3 configs, got {len(entries)}", "configs")
    top_seed = _top_seed(doc, None)
    configs = []
    for i, entry in enumerate(entries):
        where = ("configs", i)
        entry = _mapping(doc, entry, {"label", "signal", "detector", "sweep"}, *where)
        merged = {}
        for key in ("signal", "detector", "sweep"):
            base = dict(defaults.get(key) or {})
            if key == "signal" and "kind" in (entry.get(key) or {}) and base.get("kind") != entry[key]["kind"]:
                base = {}
            base.update(entry.get(key) or {})
            if not base and key != "sweep":
                doc.fail(f"study entry {i} has no '{key}'", *where)
            merged[key] = base
        signal = parse_signal(doc, merged["signal"], *where, "signal")
        detector = parse_detector(doc, merged["detector"], *where, "detector")
        cfg = parse_sweep(doc, signal, detector, merged["sweep"], top_seed, str(entry.get("label", f"config{i}")), *where, "sweep")
        configs.append(_override(cfg, seed))
    return configs, _output_path(doc)


@dataclass(frozen=True)
class AdaptConfig:
    signal: SignalSpec
    detector: DetectorSpec
    initial: ControllerState
    iterations: int
    seed: int


def load_adapt_config(path, seed: Optional[int] = None) -> tuple[AdaptConfig, Optional[str]]:
    doc = load_document(path)
    _mapping(doc, doc.data, {"signal", "detector", "sweep", "controller", "output", "seed"})
    for key in ("signal", "detector", "controller"):
        if key not in doc.data:
            doc.fail(f"missing required section '{key}'")
    signal = parse_signal(doc, doc.data["signal"], "signal")
    detector = parse_detector(doc, doc.data["detector"], "detector")
    raw = _mapping(doc, doc.data["controller"], CONTROLLER_KEYS, "controller")
    p = ("controller",)
    iterations = _number(doc, raw, "iterations", *p, default=200, kind=int, nonneg=True)
    window = _number(doc, raw, "window", *p, default=10_000, kind=int)
    if window < 1000:
        doc.fail(f"'window' must be >= 1000, got {window}", *p, "window")
    decay = _number(doc, raw, "decay", *p, default=0.95, positive=True)
    if decay > 1:
        doc.fail("'decay' must be <= 1", *p, "decay")
    initial = ControllerState(
        sigma=_number(doc, raw, "sigma0", *p, default=0.1, nonneg=True),
        step=_number(doc, raw, "step", *p, default=0.1, positive=True),
        window=window,
        decay=decay,
        min_step=_number(doc, raw, "min_step", *p, default=1e-3, positive=True),
        smoothing=_number(doc, raw, "smoothing", *p, default=0.2, positive=True),
    )
    ctl_seed = _number(doc, raw, "seed", *p, default=_top_seed(doc, None), kind=int, nonneg=True)
    return AdaptConfig(signal, detector, initial, iterations, seed if seed is not None else ctl_seed), _output_path(doc)
