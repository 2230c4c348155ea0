"""Seeded Monte-Carlo runs of the four estimators on shared data.

Every trial draws one channel, one training sequence and one noise sequence,
and every algorithm in the trial consumes exactly those streams.  Trial and
stream seeds are derived from ``(base_seed, trial_index, stream_tag)`` with
:class:`numpy.random.SeedSequence`, so results do not depend on how many
trials are run or on the order in which workers finish.
"""

from __future__ import annotations

import hashlib
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import kernels
from .channel import (NoiseModel, TrainingSource, gen_mimo_channel, observe_block,
                      received_power, sigma_from_snr)
from .filters import tied_step_size

LMS = "lms"
L0LMS = "l0lms"
AC_LMS = "ac-lms"
AC_L0LMS = "ac-l0lms"
LMS_SLOW = "lms-slow"
L0LMS_SLOW = "l0lms-slow"

ALGORITHMS = (LMS, L0LMS, AC_LMS, AC_L0LMS)
# Standalone runs of the slow member step size, used as references.
REFERENCE_ALGORITHMS = (LMS_SLOW, L0LMS_SLOW)
ALL_ALGORITHMS = ALGORITHMS + REFERENCE_ALGORITHMS
COMBINED = (AC_LMS, AC_L0LMS)

_CHANNEL, _TRAINING, _NOISE, _POWER = range(4)


@dataclass(frozen=True)
class ExperimentConfig:
    """Simulation parameters; defaults follow the reference setup."""

    n_r: int = 24
    n_t: int = 8
    n: int = 16
    k: int = 1
    snr_db: float = 10.0
    delta: float = 0.5
    gamma: float = 4.0
    mu_lambda: float = 1.0
    beta_coeff: float = 0.02
    alpha: float = 10.0
    iterations: int = 3000
    runs: int = 100
    base_seed: int = 0
    algorithms: tuple = ALGORITHMS
    # Regularisation of the normalised combiner step; None = raw product rule.
    combiner_reg: float | None = 1.0
    # Fixed noise variance overriding the SNR (0 gives noiseless runs).
    sigma2: float | None = None
    power_samples: int = 1000

    def __post_init__(self):
        object.__setattr__(self, "algorithms", tuple(self.algorithms))
        if not 0.0 < self.delta < 1.0:
            raise ValueError(f"delta must lie in (0, 1), got {self.delta}")
        if self.iterations <= 0 or self.runs <= 0:
            raise ValueError("iterations and runs must be positive")
        if not 0 <= self.k <= self.n:
            raise ValueError(f"need 0 <= K <= N, got K={self.k}, N={self.n}")
        if min(self.n_r, self.n_t, self.n) <= 0:
            raise ValueError("dimensions must be positive")
        if not self.algorithms:
            raise ValueError("no algorithms selected")
        unknown = set(self.algorithms) - set(ALL_ALGORITHMS)
        if unknown:
            raise ValueError(f"unknown algorithms: {sorted(unknown)}")
        if len(set(self.algorithms)) != len(self.algorithms):
            raise ValueError("duplicate algorithm")
        if self.combiner_reg is not None and self.combiner_reg < 0:
            raise ValueError("combiner_reg must be non-negative")
        if self.sigma2 is not None and self.sigma2 < 0:
            raise ValueError("sigma2 must be non-negative")

    @property
    def taps(self):
        return self.n * self.n_t

    @property
    def mu1(self):
        return 1.0 / (self.taps + self.gamma)

    @property
    def mu2(self):
        return tied_step_size(self.mu1, self.delta)


@dataclass
class MseTrace:
    algorithm: str
    values: np.ndarray
    lambda_trace: np.ndarray | None = None

    def __len__(self):
        return len(self.values)


@dataclass
class TrialResult:
    seed: tuple
    sigma2: float
    beta: float
    mse: dict = field(default_factory=dict)
    # (iterations, N_r) per-antenna mixing parameters, combined algorithms only
    lam: dict = field(default_factory=dict)
    # (iterations, N_r) a-priori output errors (overall error for combinations)
    errors: dict = field(default_factory=dict)
    stream_digest: dict = field(default_factory=dict)

    def lambda_mean(self, algorithm):
        return self.lam[algorithm].mean(axis=1)


def stream_seed(base_seed, trial_index, tag):
    return np.random.SeedSequence(base_seed, spawn_key=(trial_index, tag))


def _rng(base_seed, trial_index, tag):
    return np.random.default_rng(stream_seed(base_seed, trial_index, tag))


def mse(h_true, estimates):
    """Sum over antennas of squared estimation error norms."""
    hm = getattr(h_true, "matrix", h_true)
    hm = np.asarray(hm, dtype=np.float64)
    est = np.asarray(estimates, dtype=np.float64)
    if est.shape != hm.shape:
        raise ValueError(f"estimates shape {est.shape} does not match channel {hm.shape}")
    diff = hm - est
    return float(np.sum(diff * diff))


def trial_data(cfg, trial_index):
    """Channel, regressors, observations and noise variance of one trial."""
    h = gen_mimo_channel(cfg.n_r, cfg.n, cfg.n_t, cfg.k, _rng(cfg.base_seed, trial_index, _CHANNEL))
    if cfg.sigma2 is None:
        probe = TrainingSource(cfg.n, cfg.n_t, _rng(cfg.base_seed, trial_index, _POWER))
        sigma2 = sigma_from_snr(received_power(h, probe, cfg.power_samples), cfg.snr_db)
    else:
        sigma2 = float(cfg.sigma2)
    source = TrainingSource(cfg.n, cfg.n_t, _rng(cfg.base_seed, trial_index, _TRAINING))
    xs = source.block(cfg.iterations)
    noise = NoiseModel(sigma2, _rng(cfg.base_seed, trial_index, _NOISE))
    ds = observe_block(h, xs, noise)
    return h, np.ascontiguousarray(xs), np.ascontiguousarray(ds), sigma2


def _digest(xs, ds):
    return hashlib.sha256(xs.tobytes() + ds.tobytes()).hexdigest()


def run_trial(cfg, trial_index=0):
    """Run every configured algorithm on one seeded trial."""
    h, xs, ds, sigma2 = trial_data(cfg, trial_index)
    hm = np.ascontiguousarray(h.matrix)
    beta = cfg.beta_coeff * sigma2
    mu1, mu2 = cfg.mu1, cfg.mu2
    reg = -1.0 if cfg.combiner_reg is None else float(cfg.combiner_reg)
    shape = (cfg.n_r, cfg.taps)
    t = cfg.iterations
    result = TrialResult(seed=(cfg.base_seed, trial_index), sigma2=sigma2, beta=beta)
    for alg in cfg.algorithms:
        result.stream_digest[alg] = _digest(xs, ds)
        mse_out = np.empty(t)
        err_out = np.empty((t, cfg.n_r))
        sparse_beta = beta if alg in (L0LMS, AC_L0LMS, L0LMS_SLOW) else 0.0
        if alg in COMBINED:
            lam = np.ones(cfg.n_r)
            lam_out = np.empty((t, cfg.n_r))
            kernels.run_combined_bank(xs, ds, hm, np.zeros(shape), np.zeros(shape), lam,
                                      mu1, mu2, sparse_beta, cfg.alpha, cfg.mu_lambda, reg,
                                      mse_out, lam_out, err_out)
            result.lam[alg] = lam_out
        else:
            mu = mu2 if alg in REFERENCE_ALGORITHMS else mu1
            kernels.run_filter_bank(xs, ds, hm, np.zeros(shape), mu, sparse_beta, cfg.alpha,
                                    mse_out, err_out)
        result.mse[alg] = mse_out
        result.errors[alg] = err_out
    return result


def _reduced_trial(args):
    cfg, index = args
    res = run_trial(cfg, index)
    lam = {alg: res.lambda_mean(alg) for alg in res.lam}
    return res.mse, lam


def _run_trials(cfg, workers):
    jobs = [(cfg, i) for i in range(cfg.runs)]
    if workers and workers > 1 and cfg.runs > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_reduced_trial, jobs))
    return [_reduced_trial(j) for j in jobs]


def monte_carlo(cfg, workers=1):
    """Pointwise average of the MSE (and mean-lambda) traces over ``cfg.runs`` trials.

    Trials may run in a process pool; results are reduced in trial-index
    order, so the output does not depend on ``workers``.
    """
    trials = _run_trials(cfg, workers)
    traces = []
    for alg in cfg.algorithms:
        values = np.mean(np.stack([m[alg] for m, _ in trials]), axis=0)
        lam = None
        if alg in COMBINED:
            lam = np.mean(np.stack([lm[alg] for _, lm in trials]), axis=0)
        traces.append(MseTrace(alg, values, lam))
    return traces


def sweep(cfg, name, values, workers=1):
    """Run :func:`monte_carlo` once per value of config field ``name``.

    All values share the same trial seeds.  Returns ``[(value, traces), ...]``
    in input order.
    """
    if name not in ExperimentConfig.__dataclass_fields__:
        raise ValueError(f"unknown parameter {name!r}")
    return [(v, monte_carlo(replace(cfg, **{name: v}), workers)) for v in values]


def sweep_delta(cfg, deltas, workers=1):
    for d in deltas:
        if not 0.0 < d < 1.0:
            raise ValueError(f"delta must lie in (0, 1), got {d}")
    return sweep(cfg, "delta", deltas, workers)


def _values(trace):
    return np.asarray(trace.values if isinstance(trace, MseTrace) else trace, dtype=np.float64)


def steady_state_mse(trace, window_fraction=0.1):
    """Mean of the trailing ``ceil(window_fraction * len)`` samples."""
    if not 0.0 < window_fraction <= 1.0:
        raise ValueError("window_fraction must lie in (0, 1]")
    v = _values(trace)
    if v.size == 0:
        raise ValueError("empty trace")
    count = max(1, math.ceil(round(window_fraction * v.size, 9)))
    return float(np.mean(v[-count:]))


def convergence_time(trace, level, start=0):
    """First index ``n >= start`` after which the trace never exceeds ``level``.

    Returns ``None`` when the trace is still above ``level`` at its end.
    """
    if not level > 0:
        raise ValueError("level must be positive")
    v = _values(trace)[start:]
    above = np.flatnonzero(v > level)
    if above.size == 0:
        return start
    n = int(above[-1]) + 1
    return None if n >= v.size else start + n


def to_db(value):
    return 10.0 * math.log10(value)
