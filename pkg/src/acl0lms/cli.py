"""Command-line front end.

Example::

    acl0lms run --mode sweep-delta --deltas 0.1,0.3,0.5,0.7,0.9 --runs 20 --out results/

Settings are resolved as command-line flags over ``--config`` file values
over built-in defaults.  The config file holds ``key = value`` lines with
``#`` comments; keys are the long flag names with dashes or underscores.
"""

from __future__ import annotations

import argparse
import csv
import logging
import math
import os
import sys
from dataclasses import dataclass, replace

import numpy as np

from . import __version__, kernels
from .channel import gen_mimo_channel, save_channel
from .harness import (ALL_ALGORITHMS, ExperimentConfig, convergence_time,
                      monte_carlo, steady_state_mse, stream_seed, sweep)

log = logging.getLogger("acl0lms")

MODES = ("single", "sweep-k", "sweep-snr", "sweep-delta")
_SWEEP_FIELD = {"sweep-k": ("ks", "k"), "sweep-snr": ("snrs", "snr_db"), "sweep-delta": ("deltas", "delta")}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class CliConfig:
    experiment: ExperimentConfig
    mode: str = "single"
    sweep_values: tuple = ()
    out: str = "."
    workers: int = 1
    window_fraction: float = 0.1
    verbosity: int = 0


def _float_list(text):
    return tuple(float(v) for v in str(text).split(",") if v.strip())


def _int_list(text):
    return tuple(int(v) for v in str(text).split(",") if v.strip())


def _opt_float(text):
    if str(text).strip().lower() in ("none", "off", ""):
        return None
    return float(text)


def _algorithms(text):
    algs = tuple(a.strip().lower() for a in str(text).split(",") if a.strip())
    bad = [a for a in algs if a not in ALL_ALGORITHMS]
    if bad:
        raise ValueError(f"unknown algorithm(s) {bad}; choose from {','.join(ALL_ALGORITHMS)}")
    return algs


# key -> (parser, ExperimentConfig field or None, help)
_OPTIONS = {
    "mode": (str, None, f"experiment mode: {' | '.join(MODES)}"),
    "n_r": (int, "n_r", "receive antennas"),
    "n_t": (int, "n_t", "single-antenna users"),
    "n": (int, "n", "taps per sub-channel"),
    "k": (int, "k", "nonzero taps per sub-channel"),
    "snr_db": (float, "snr_db", "SNR in dB"),
    "delta": (float, "delta", "slow/fast step-size ratio, in (0, 1)"),
    "gamma": (float, "gamma", "offset in mu1 = 1/(N*N_t + gamma)"),
    "mu_lambda": (float, "mu_lambda", "combiner adaptation rate"),
    "beta_coeff": (float, "beta_coeff", "l0 penalty weight per unit noise variance"),
    "alpha": (float, "alpha", "l0 surrogate sharpness"),
    "combiner_reg": (_opt_float, "combiner_reg", "combiner step regularisation ('none' = raw rule)"),
    "iterations": (int, "iterations", "iterations per trial"),
    "runs": (int, "runs", "Monte-Carlo trials"),
    "seed": (int, "base_seed", "base seed"),
    "algorithms": (_algorithms, "algorithms", f"comma list from {','.join(ALL_ALGORITHMS)}"),
    "ks": (_int_list, None, "K values for sweep-k"),
    "snrs": (_float_list, None, "SNR values for sweep-snr"),
    "deltas": (_float_list, None, "delta values for sweep-delta"),
    "out": (str, None, "output directory"),
    "workers": (int, None, "parallel worker processes"),
    "window_fraction": (float, None, "trailing fraction used for steady-state MSE"),
}


def read_config_file(path):
    """Parse a flat ``key = value`` file into raw string values."""
    values = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
            key, value = (s.strip() for s in line.split("=", 1))
            key = key.replace("-", "_")
            if key not in _OPTIONS:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            values[key] = value
    return values


def build_parser():
    parser = argparse.ArgumentParser(prog="acl0lms", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment and write CSV learning curves")
    run.add_argument("--config", help="key = value configuration file")
    for key, (_, _, help_text) in _OPTIONS.items():
        run.add_argument("--" + key.replace("_", "-"), dest=key, default=None, help=help_text)
    run.add_argument("-v", "--verbose", action="count", default=0)

    ch = sub.add_parser("channel", help="draw one channel realisation and save it as text")
    for key in ("n_r", "n_t", "n", "k"):
        ch.add_argument("--" + key.replace("_", "-"), dest=key, type=int,
                        default=ExperimentConfig.__dataclass_fields__[key].default)
    ch.add_argument("--seed", type=int, default=0)
    ch.add_argument("--trial", type=int, default=0)
    ch.add_argument("--out", required=True)
    return parser


def parse_config(args, config_file=None):
    """Resolve a :class:`CliConfig` from parsed ``run`` arguments.

    ``args`` may be an :class:`argparse.Namespace` or a mapping of raw
    values.  Raises :class:`ConfigError` on any invalid combination.
    """
    raw = {}
    given = vars(args) if isinstance(args, argparse.Namespace) else dict(args)
    config_file = config_file or given.get("config")
    if config_file:
        raw.update(read_config_file(config_file))
    for key in _OPTIONS:
        if given.get(key) is not None:
            raw[key] = given[key]
    unknown = set(given) - set(_OPTIONS) - {"config", "command", "verbose"}
    if unknown:
        raise ConfigError(f"unknown option(s): {sorted(unknown)}")

    parsed = {}
    for key, value in raw.items():
        conv = _OPTIONS[key][0]
        try:
            parsed[key] = conv(value) if isinstance(value, str) else value
        except ValueError as exc:
            raise ConfigError(f"bad value for {key}: {value!r} ({exc})") from None

    mode = parsed.get("mode", "single")
    if mode not in MODES:
        raise ConfigError(f"unknown mode {mode!r}; choose from {', '.join(MODES)}")
    for m, (list_key, _) in _SWEEP_FIELD.items():
        if list_key in parsed and m != mode:
            raise ConfigError(f"--{list_key} given but mode is {mode!r}")

    exp_kwargs = {f: parsed[key] for key, (_, f, _) in _OPTIONS.items() if f and key in parsed}
    try:
        exp = ExperimentConfig(**exp_kwargs)
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from None

    sweep_values = ()
    if mode != "single":
        list_key, field_name = _SWEEP_FIELD[mode]
        sweep_values = parsed.get(list_key, ())
        if not sweep_values:
            raise ConfigError(f"mode {mode} needs --{list_key}")
        for v in sweep_values:
            try:
                replace(exp, **{field_name: v})
            except ValueError as exc:
                raise ConfigError(str(exc)) from None

    wf = parsed.get("window_fraction", 0.1)
    if not 0.0 < wf <= 1.0:
        raise ConfigError("window_fraction must lie in (0, 1]")
    workers = parsed.get("workers", 1)
    if workers < 1:
        raise ConfigError("workers must be >= 1")
    return CliConfig(exp, mode, tuple(sweep_values), parsed.get("out", "."), workers, wf,
                     given.get("verbose", 0) or 0)


def fmt(value):
    """Shortest round-trip decimal for a float (platform independent)."""
    return repr(float(value))


def _param_label(value):
    return fmt(value) if isinstance(value, float) else str(value)


def write_curves(path, traces):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["iteration", "algorithm", "mse", "lambda"])
        for tr in traces:
            for i, v in enumerate(tr.values):
                lam = "" if tr.lambda_trace is None else fmt(tr.lambda_trace[i])
                w.writerow([i, tr.algorithm, fmt(v), lam])


def summarize(traces, param_value, cfg):
    """Summary rows: steady-state MSE and iterations to reach twice that level."""
    rows = []
    for tr in traces:
        ss = steady_state_mse(tr, cfg.window_fraction)
        ct = convergence_time(tr, 2.0 * ss, start=cfg.experiment.n) if ss > 0 else None
        rows.append((tr.algorithm, param_value, ss, ct))
    return rows


def write_summary(path, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["algorithm", "param_value", "steady_state_mse", "convergence_iterations"])
        for alg, pv, ss, ct in rows:
            w.writerow([alg, "" if pv is None else _param_label(pv), fmt(ss),
                        "" if ct is None else ct])


def print_summary(rows, stream=None):
    stream = stream or sys.stdout
    stream.write(f"{'algorithm':<12} {'param':>8} {'steady MSE':>14} {'dB':>8} {'conv. it':>9}\n")
    for alg, pv, ss, ct in rows:
        db = f"{10 * math.log10(ss):8.2f}" if ss > 0 else f"{'-inf':>8}"
        pv_s = "" if pv is None else _param_label(pv)
        stream.write(f"{alg:<12} {pv_s:>8} {ss:14.6g} {db} {'-' if ct is None else ct:>9}\n")


def run(cfg):
    """Execute the configured experiment; returns the list of files written."""
    os.makedirs(cfg.out, exist_ok=True)
    exp = cfg.experiment
    log.info("backend=%s mode=%s runs=%d iterations=%d", kernels.BACKEND, cfg.mode,
             exp.runs, exp.iterations)
    written = []
    rows = []
    if cfg.mode == "single":
        traces = monte_carlo(exp, cfg.workers)
        path = os.path.join(cfg.out, "curves.csv")
        write_curves(path, traces)
        written.append(path)
        rows.extend(summarize(traces, None, cfg))
    else:
        field_name = _SWEEP_FIELD[cfg.mode][1]
        for value, traces in sweep(exp, field_name, cfg.sweep_values, cfg.workers):
            path = os.path.join(cfg.out, f"curves_{field_name}={_param_label(value)}.csv")
            write_curves(path, traces)
            written.append(path)
            rows.extend(summarize(traces, value, cfg))
    path = os.path.join(cfg.out, "summary.csv")
    write_summary(path, rows)
    written.append(path)
    print_summary(rows)
    return written


def _channel_command(args):
    rng = np.random.default_rng(stream_seed(args.seed, args.trial, 0))
    h = gen_mimo_channel(args.n_r, args.n, args.n_t, args.k, rng)
    save_channel(args.out, h, args.seed)
    return [args.out]


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * getattr(args, "verbose", 0),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "channel":
            _channel_command(args)
            return 0
        cfg = parse_config(args)
        run(cfg)
    except ConfigError as exc:
        parser.exit(2, f"acl0lms: error: {exc}\n")
    except OSError as exc:
        sys.stderr.write(f"acl0lms: error: {exc}\n")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
