"""Command-line front end: ``srlab {sweep,analytic,scatter,adapt}``.

Exit codes: 0 success, 1 runtime failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import logging
import math
import os
import sys
import warnings
from decimal import Decimal
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import analytic
from .config import load_adapt_config, load_study_config, load_sweep_config
from .errors import ConfigError, OutOfModelError, SRLabError
from .resonance import run_controller, run_scatter_study, run_sweep

log = logging.getLogger("srlab")

SWEEP_HEADER = "sigma,mi,ac,cc,q,snr,mi_se,ac_se"
ANALYTIC_HEADER = "sigma,q_analytic,mi_analytic,ac_analytic,cc_analytic"
SCATTER_HEADER = "config_id,sigma_mi,sigma_ac,boundary_flag"
ADAPT_HEADER = "iter,sigma,ac_estimate,step"


def fmt(value) -> str:
    """Fixed notation, 6 significant digits; NaN/None become an empty field."""
    if value is None:
        return ""
    value = float(value)
    if math.isnan(value):
        return ""
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    if value == 0.0:
        value = 0.0
    # round in scientific form, then print positionally
    return format(Decimal(f"{value:.5e}"), "f")


def _rows(header: str, rows, footer: Sequence[str] = ()) -> str:
    lines = [header] + [",".join(r) for r in rows] + list(footer)
    return "\n".join(lines) + "\n"


def _emit(text: str, out: Optional[str]) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
        return
    Path(out).write_text(text, newline="\n")


def _threads(args) -> int:
    if args.threads is not None:
        return args.threads
    env = os.environ.get("SRLAB_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"SRLAB_THREADS must be an integer, got {env!r}")
    return 1


def _require_config(args) -> str:
    if not args.config:
        raise ConfigError("--config is required for this command")
    return args.config


def cmd_sweep(args) -> int:
    cfg, out = load_sweep_config(_require_config(args), args.seed)
    curve = run_sweep(cfg, _threads(args))
    m, se = curve.means, curve.ses
    rows = (
        [fmt(s), fmt(m["mi"][i]), fmt(m["ac"][i]), fmt(m["cc"][i]), fmt(m["q"][i]),
         fmt(m["snr"][i]), fmt(se["mi"][i]), fmt(se["ac"][i])]
        for i, s in enumerate(curve.sigmas)
    )
    _emit(_rows(SWEEP_HEADER, rows), args.out or out)
    return 0


def cmd_analytic(args) -> int:
    if not args.theta > 1:
        raise ConfigError(f"--theta must be > 1 for the analytic model, got {args.theta}")
    if not 0 <= args.q <= 1:
        raise ConfigError(f"--q must lie in [0, 1], got {args.q}")
    if args.sigma_step <= 0 or args.sigma_max < args.sigma_min or args.sigma_min < 0:
        raise ConfigError("sigma range must satisfy 0 <= sigma-min <= sigma-max and sigma-step > 0")
    count = int(np.floor((args.sigma_max - args.sigma_min) / args.sigma_step + 1e-9)) + 1
    sigmas = np.round(args.sigma_min + args.sigma_step * np.arange(count), 10)
    q = analytic.analytic_q(args.theta, sigmas)
    c_ss = analytic.input_ac_bipolar(args.q)
    rows = (
        [fmt(s), fmt(qi), fmt(analytic.analytic_mi(qi)), fmt(analytic.analytic_ac(qi, c_ss)), fmt(analytic.analytic_cc(qi))]
        for s, qi in zip(sigmas, np.atleast_1d(q))
    )
    _emit(_rows(ANALYTIC_HEADER, rows), args.out)
    return 0


def cmd_scatter(args) -> int:
    configs, out = load_study_config(_require_config(args), args.seed)
    with warnings.catch_warnings():
        # surfaced below on stderr and in the CSV footer
        warnings.simplefilter("ignore", RuntimeWarning)
        result = run_scatter_study(configs, _threads(args))
    rows = (
        [label, fmt(p[0]), fmt(p[1]), "1" if flag else "0"]
        for label, p, flag in zip(result.labels, result.pairs, result.boundary)
    )
    footer = [f"# pearson_r={fmt(result.r) or 'nan'}"]
    if result.warning:
        footer.append(f"# warning: {result.warning}")
        print(f"srlab: warning: {result.warning}", file=sys.stderr)
    _emit(_rows(SCATTER_HEADER, rows, footer), args.out or out)
    return 0


def cmd_adapt(args) -> int:
    cfg, out = load_adapt_config(_require_config(args), args.seed)
    states = run_controller(cfg.signal, cfg.detector, cfg.initial, cfg.iterations, cfg.seed)[1:]
    rows = ([str(s.iteration), fmt(s.sigma), fmt(s.ac_estimate), fmt(s.step)] for s in states)
    footer = [f"# converged_sigma={fmt(states[-1].sigma)}"] if states else []
    _emit(_rows(ADAPT_HEADER, rows, footer), args.out or out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML experiment config")
    common.add_argument("--out", help="output CSV path (default: config output.path, else stdout)")
    common.add_argument("--seed", type=int, help="override every seed in the config")
    common.add_argument("--threads", type=int, help="worker threads for sweeps (env SRLAB_THREADS)")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="srlab", description="Adaptive stochastic resonance experiments.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("sweep", parents=[common], help="noise sweep -> resonance curve CSV")
    a = sub.add_parser("analytic", parents=[common], help="closed-form bipolar model curves")
    a.add_argument("--theta", type=float, required=True)
    a.add_argument("--q", type=float, default=0.7, help="bipolar persistence probability")
    a.add_argument("--sigma-min", type=float, default=0.0)
    a.add_argument("--sigma-max", type=float, default=3.0)
    a.add_argument("--sigma-step", type=float, default=0.01)
    sub.add_parser("scatter", parents=[common], help="MI-optimal vs AC-optimal noise across a study")
    sub.add_parser("adapt", parents=[common], help="run the AC-driven noise controller")
    return parser


COMMANDS = {"sweep": cmd_sweep, "analytic": cmd_analytic, "scatter": cmd_scatter, "adapt": cmd_adapt}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    if args.threads is not None and args.threads < 1:
        print("srlab: error: --threads must be >= 1", file=sys.stderr)
        return 2
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, OutOfModelError) as exc:
        print(f"srlab: config error: {exc}", file=sys.stderr)
        return 2
    except (SRLabError, OSError, ValueError) as exc:
        log.debug("runtime failure", exc_info=True)
        print(f"srlab: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
