"""Sparse large-scale MIMO channel, PN training source and noisy observations.

All quantities are real-valued.  A MIMO channel is stored as an
``(N_r, N*N_t)`` matrix whose row ``r`` is the concatenation of the ``N_t``
length-``N`` sub-channels seen by receive antenna ``r``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class SparseChannel:
    taps: np.ndarray
    support: tuple

    @property
    def length(self):
        return self.taps.shape[0]


@dataclass(frozen=True)
class MimoChannel:
    """Stack of per-antenna MISO channel vectors (one row per antenna)."""

    matrix: np.ndarray
    n: int
    n_t: int
    k: int

    def __post_init__(self):
        if self.matrix.ndim != 2 or self.matrix.shape[1] != self.n * self.n_t:
            raise ValueError("channel matrix must have N*N_t columns")

    @property
    def n_r(self):
        return self.matrix.shape[0]

    @property
    def taps(self):
        return self.matrix.shape[1]

    def row(self, r):
        return self.matrix[r]

    def sub_channel(self, r, t):
        return self.matrix[r, t * self.n:(t + 1) * self.n]


def gen_sparse_channel(m, k, rng):
    """Length-``m`` vector with ``k`` standard-Gaussian taps at random positions."""
    if k < 0 or k > m:
        raise ValueError(f"need 0 <= K <= M, got K={k}, M={m}")
    support = np.sort(rng.choice(m, size=k, replace=False))
    taps = np.zeros(m)
    taps[support] = rng.standard_normal(k)
    return SparseChannel(taps, tuple(int(i) for i in support))


def gen_mimo_channel(n_r, n, n_t, k, rng):
    """Draw ``N_r`` MISO rows, each made of ``N_t`` independent ``K``-sparse sub-channels."""
    if k > n:
        raise ValueError(f"need K <= N, got K={k}, N={n}")
    h = np.empty((n_r, n * n_t))
    for r in range(n_r):
        for t in range(n_t):
            h[r, t * n:(t + 1) * n] = gen_sparse_channel(n, k, rng).taps
    return MimoChannel(h, n, n_t, k)


class TrainingSource:
    """Per-user tapped delay lines fed with i.i.d. equiprobable +/-1 symbols.

    The regressor is the concatenation of the ``N_t`` delay lines; within a
    block the newest symbol comes first.  Lines start zero-filled, so the
    first ``N - 1`` regressors are only partially populated.
    """

    def __init__(self, n, n_t, rng):
        self.n = n
        self.n_t = n_t
        self.rng = rng
        self._lines = np.zeros((n_t, n))

    @property
    def taps(self):
        return self.n * self.n_t

    def _symbols(self, count):
        # One uniform double per symbol keeps the stream independent of chunking.
        return np.where(self.rng.random((count, self.n_t)) < 0.5, -1.0, 1.0)

    def next_regressor(self):
        s = self._symbols(1)[0]
        self._lines[:, 1:] = self._lines[:, :-1]
        self._lines[:, 0] = s
        return self._lines.reshape(-1).copy()

    def block(self, count):
        """Return the next ``count`` regressors as a ``(count, M)`` array.

        Equivalent to ``count`` calls of :meth:`next_regressor`.
        """
        n = self.n
        syms = self._symbols(count)
        # history[u, j] is the j-th symbol of user u, oldest first
        history = np.concatenate([self._lines[:, ::-1], syms.T], axis=1)
        out = np.empty((count, self.n_t, n))
        for lag in range(n):
            out[:, :, lag] = history[:, n + np.arange(count) - lag].T
        self._lines = history[:, -n:][:, ::-1].copy()
        return out.reshape(count, -1)


@dataclass
class NoiseModel:
    sigma2: float
    rng: np.random.Generator = field(repr=False)

    def __post_init__(self):
        if not self.sigma2 >= 0:
            raise ValueError("noise variance must be non-negative")

    def sample(self, shape):
        return np.sqrt(self.sigma2) * self.rng.standard_normal(shape)


def _channel_matrix(h):
    return h.matrix if isinstance(h, MimoChannel) else np.asarray(h, dtype=np.float64)


def observe(h, x, noise):
    """Noisy received samples ``d = H x + z`` for one regressor."""
    hm = _channel_matrix(h)
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (hm.shape[1],):
        raise ValueError(f"regressor must have length {hm.shape[1]}, got shape {x.shape}")
    return hm @ x + noise.sample(hm.shape[0])


def observe_block(h, xs, noise):
    """Vectorised :func:`observe` over the rows of ``xs``; returns ``(T, N_r)``."""
    hm = _channel_matrix(h)
    xs = np.asarray(xs, dtype=np.float64)
    if xs.ndim != 2 or xs.shape[1] != hm.shape[1]:
        raise ValueError(f"regressors must have {hm.shape[1]} columns, got shape {xs.shape}")
    return xs @ hm.T + noise.sample((xs.shape[0], hm.shape[0]))


def sigma_from_snr(signal_power, snr_db):
    """Noise variance giving ``snr_db`` for the given received power."""
    if not signal_power > 0:
        raise ValueError("signal power must be positive")
    return signal_power / 10.0 ** (snr_db / 10.0)


def received_power(h, source, count=1000):
    """Average per-antenna power of the noiseless output ``H x``.

    The source is first run for ``N`` steps so that every regressor used in
    the estimate is fully populated.
    """
    hm = _channel_matrix(h)
    source.block(source.n)
    xs = source.block(count)
    return float(np.mean((xs @ hm.T) ** 2))


# ---------------------------------------------------------------------------
# Flat text format: header "M N_r N N_t K seed", then one row per line.
# ---------------------------------------------------------------------------

def save_channel(path, h, seed):
    hm = h.matrix
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"{h.taps} {h.n_r} {h.n} {h.n_t} {h.k} {seed}\n")
        for row in hm:
            fh.write(" ".join(repr(float(v)) for v in row) + "\n")


def load_channel(path):
    """Read a channel written by :func:`save_channel`; returns ``(channel, seed)``."""
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 6:
            raise ValueError("header must read 'M N_r N N_t K seed'")
        m, n_r, n, n_t, k, seed = (int(v) for v in header)
        rows = [[float(v) for v in line.split()] for line in fh if line.strip()]
    hm = np.array(rows, dtype=np.float64)
    if hm.shape != (n_r, m) or m != n * n_t:
        raise ValueError(f"body shape {hm.shape} does not match header")
    return MimoChannel(hm, n, n_t, k), seed
