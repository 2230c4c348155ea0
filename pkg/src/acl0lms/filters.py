"""Adaptive filter state machines: LMS, l0-LMS and their affine combinations.

Every filter holds its weights as a numpy array.  A 1-D array of length ``M``
is a single MISO estimate; a 2-D array of shape ``(N_r, M)`` is a bank of
independent per-antenna filters that share the regressor ``x`` and take one
desired sample per row.  The same update code serves both cases through
broadcasting, so a bank behaves exactly like ``N_r`` separate filters.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# Default stability bound for i.i.d. unit-power +/-1 training (R = I).
DEFAULT_MU_MAX = 1.0


class DegenerateDifferential(ValueError):
    """Raised when the two member filters are (numerically) identical."""


def _as_vector(x, length, name="x"):
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] != length:
        raise ValueError(f"{name} must be a vector of length {length}, got shape {x.shape}")
    return x


def _check_finite(*arrays):
    for a in arrays:
        if not np.all(np.isfinite(a)):
            raise ValueError("non-finite input")


def _as_desired(d, weights):
    d = np.asarray(d, dtype=np.float64)
    expected = weights.shape[:-1]
    if d.shape != expected:
        raise ValueError(f"desired sample must have shape {expected}, got {d.shape}")
    return d


# ---------------------------------------------------------------------------
# Unchecked update primitives, shared by the filter classes and the
# pure-Python kernel backend.
# ---------------------------------------------------------------------------

def lms_update(w, x, e, mu):
    """Return ``w + mu * e * x`` (row-wise for a bank)."""
    return w + np.multiply.outer(mu * e, x) if w.ndim > 1 else w + (mu * e) * x


def zero_attractor(w, alpha):
    """Sparse penalty direction of the approximated l0 norm.

    Element ``l`` is ``alpha*sgn(w_l) - alpha**2 * w_l`` inside the
    attraction zone ``|w_l| <= 1/alpha`` and zero outside it.  It is the
    first-order Taylor expansion of the gradient of ``approx_l0_norm`` and
    points away from zero, so subtracting it pulls small taps to zero.

    Parameters
    ----------
    w : array_like
        Weight vector (or bank of weight vectors).
    alpha : float
        Sharpness of the exponential l0 surrogate, ``alpha > 0``.

    Returns
    -------
    numpy.ndarray
        Array of the same shape as ``w``.
    """
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    w = np.asarray(w, dtype=np.float64)
    a2 = alpha * alpha
    g = alpha * np.sign(w) - a2 * w
    return np.where(np.abs(w) <= 1.0 / alpha, g, 0.0)


def l0lms_update(w, x, e, mu, beta, alpha):
    """LMS update followed by the zero attractor with the overshoot guard.

    The attraction is evaluated on the pre-update weights.  If it alone
    carries a coefficient across zero, that coefficient is set to 0.
    """
    v = lms_update(w, x, e, mu)
    u = v - (mu * beta) * zero_attractor(w, alpha)
    flipped = ((u > 0.0) & (v < 0.0)) | ((u < 0.0) & (v > 0.0))
    u[flipped] = 0.0
    return u


def combiner_update(lam, e, y12, mu_lambda, reg=None):
    """One stochastic-gradient step of the affine mixing parameter.

    ``e`` is the residual of the combined output and ``y12`` the output of
    the differential filter.  With ``reg=None`` the raw product rule is used.
    Otherwise the step is divided by ``reg + y12**2``, which leaves small
    differential outputs essentially untouched (for ``reg=1``) and bounds
    the step when the two members disagree strongly.
    """
    if reg is None:
        return lam + (mu_lambda * e) * y12
    return lam + (mu_lambda * e) * y12 / (reg + y12 * y12)


# ---------------------------------------------------------------------------
# Norm surrogate and genie-aided combiner
# ---------------------------------------------------------------------------

def approx_l0_norm(w, alpha):
    """Smooth l0 surrogate ``sum(1 - exp(-alpha*|w|))``."""
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    w = np.asarray(w, dtype=np.float64)
    return float(np.sum(-np.expm1(-alpha * np.abs(w))))


def l0_norm_gradient(w, alpha):
    """Exact gradient of :func:`approx_l0_norm`, ``alpha*sgn(w)*exp(-alpha|w|)``."""
    w = np.asarray(w, dtype=np.float64)
    return alpha * np.sign(w) * np.exp(-alpha * np.abs(w))


def optimal_lambda(h_true, w1, w2, r_xx=1.0):
    """Genie-aided optimal affine combiner.

    Parameters
    ----------
    h_true, w1, w2 : array_like
        True channel and the two member estimates, all of length ``M``.
    r_xx : float or array_like
        Input autocorrelation.  A scalar ``E_0`` stands for ``E_0 * I``;
        otherwise an ``M x M`` symmetric positive-semidefinite matrix.

    Returns
    -------
    float
        ``(h_true - w2)^T R (w1 - w2) / ((w1 - w2)^T R (w1 - w2))``.

    Raises
    ------
    DegenerateDifferential
        If the denominator falls below ``1e-12 * M``.
    """
    h_true = np.asarray(h_true, dtype=np.float64)
    m = h_true.shape[0]
    w1 = _as_vector(w1, m, "w1")
    w2 = _as_vector(w2, m, "w2")
    h_o2 = h_true - w2
    h_12 = w1 - w2
    if np.ndim(r_xx) == 0:
        r_h12 = float(r_xx) * h_12
    else:
        r = np.asarray(r_xx, dtype=np.float64)
        if r.shape != (m, m):
            raise ValueError(f"r_xx must be {m}x{m}, got {r.shape}")
        r_h12 = r @ h_12
    den = float(h_12 @ r_h12)
    if den < 1e-12 * m:
        raise DegenerateDifferential("member filters coincide; combiner direction undefined")
    return float(h_o2 @ r_h12) / den


def tied_step_size(mu1, delta):
    """Slow step size ``delta * mu1``, nudged by a few ulps if needed so that
    ``result / mu1 == delta`` holds exactly in floating point."""
    base = delta * mu1
    up = down = base
    for _ in range(8):
        if up / mu1 == delta:
            return float(up)
        if down / mu1 == delta:
            return float(down)
        up = np.nextafter(up, np.inf)
        down = np.nextafter(down, -np.inf)
    # Not every ratio is representable; keep the plain product.
    return float(base)


# ---------------------------------------------------------------------------
# Filter state machines
# ---------------------------------------------------------------------------

@dataclass
class LmsFilter:
    """Standard LMS filter ``h <- h + mu * e * x``."""

    weights: np.ndarray
    mu: float
    mu_max: float = DEFAULT_MU_MAX

    def __post_init__(self):
        self.weights = np.array(self.weights, dtype=np.float64)
        if self.weights.ndim not in (1, 2):
            raise ValueError("weights must be a vector or a bank of vectors")
        _check_finite(self.weights)
        if not 0.0 < self.mu < self.mu_max:
            raise ValueError(f"step size must lie in (0, {self.mu_max}), got {self.mu}")

    @classmethod
    def zeros(cls, m, mu, *, rows=None, **kwargs):
        shape = (m,) if rows is None else (rows, m)
        return cls(np.zeros(shape), mu, **kwargs)

    @property
    def taps(self):
        return self.weights.shape[-1]

    def predict(self, x):
        x = _as_vector(x, self.taps)
        return self.weights @ x

    def _update(self, x, e):
        self.weights = lms_update(self.weights, x, e, self.mu)

    def step(self, x, d):
        """Adapt on one ``(x, d)`` pair and return the a-priori error."""
        x = _as_vector(x, self.taps)
        d = _as_desired(d, self.weights)
        _check_finite(x, d)
        e = d - self.weights @ x
        self._update(x, e)
        return e


@dataclass
class L0lmsFilter(LmsFilter):
    """LMS with an l0-norm zero attractor (l0-LMS)."""

    beta: float = 0.0
    alpha: float = 10.0

    def __post_init__(self):
        super().__post_init__()
        if self.beta < 0:
            raise ValueError("beta must be non-negative")
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")

    def _update(self, x, e):
        self.weights = l0lms_update(self.weights, x, e, self.mu, self.beta, self.alpha)


@dataclass
class AffineCombiner:
    """Unconstrained mixing parameter and its adaptation rule.

    ``lam`` is a float for a single filter pair or an array with one entry
    per antenna for a bank.  It is never clipped.
    """

    lam: float | np.ndarray = 1.0
    mu_lambda: float = 1.0
    reg: float | None = None

    def __post_init__(self):
        if self.mu_lambda < 0:
            raise ValueError("mu_lambda must be non-negative")
        if self.reg is not None and self.reg < 0:
            raise ValueError("reg must be non-negative")
        _check_finite(self.lam)


@dataclass
class CombinedFilter:
    """Affine combination of a fast and a slow member filter.

    Build instances with :meth:`lms` or :meth:`l0lms` so that the slow step
    size is tied to the fast one by ``mu2 = delta * mu1``.
    """

    filter1: LmsFilter
    filter2: LmsFilter
    combiner: AffineCombiner = field(default_factory=AffineCombiner)
    delta: float | None = None

    def __post_init__(self):
        if self.filter1.weights.shape != self.filter2.weights.shape:
            raise ValueError("member filters must have the same shape")
        if type(self.filter1) is not type(self.filter2):
            raise TypeError("member filters must be of the same kind")
        if self.delta is not None and self.filter2.mu != tied_step_size(self.filter1.mu, self.delta):
            raise ValueError("filter2.mu must equal delta * filter1.mu")

    @classmethod
    def _build(cls, kind, m, mu1, delta, rows, lam, mu_lambda, reg, **kw):
        if not 0.0 < delta < 1.0:
            raise ValueError(f"delta must lie in (0, 1), got {delta}")
        f1 = kind.zeros(m, mu1, rows=rows, **kw)
        f2 = kind.zeros(m, tied_step_size(mu1, delta), rows=rows, **kw)
        if rows is not None:
            lam = np.full(rows, float(lam))
        return cls(f1, f2, AffineCombiner(lam, mu_lambda, reg), delta)

    @classmethod
    def lms(cls, m, mu1, delta, *, rows=None, lam=1.0, mu_lambda=1.0, reg=None):
        """Zero-initialised AC-LMS."""
        return cls._build(LmsFilter, m, mu1, delta, rows, lam, mu_lambda, reg)

    @classmethod
    def l0lms(cls, m, mu1, delta, beta, alpha=10.0, *, rows=None, lam=1.0,
              mu_lambda=1.0, reg=None):
        """Zero-initialised AC-l0LMS; both members share ``beta`` and ``alpha``."""
        return cls._build(L0lmsFilter, m, mu1, delta, rows, lam, mu_lambda, reg,
                          beta=beta, alpha=alpha)

    @property
    def taps(self):
        return self.filter1.taps

    @property
    def lam(self):
        return self.combiner.lam

    def equivalent_weights(self):
        """Single filter with the same output: ``lam*(w1 - w2) + w2``."""
        w1, w2 = self.filter1.weights, self.filter2.weights
        lam = np.asarray(self.combiner.lam)
        if w1.ndim > 1:
            lam = lam[:, None]
        return lam * (w1 - w2) + w2

    def predict(self, x):
        x = _as_vector(x, self.taps)
        lam = self.combiner.lam
        return lam * (self.filter1.weights @ x) + (1.0 - lam) * (self.filter2.weights @ x)

    def combiner_step(self, x, d):
        """Adapt ``lam`` only, using the members as they currently stand."""
        x = _as_vector(x, self.taps)
        d = _as_desired(d, self.filter1.weights)
        y1 = self.filter1.weights @ x
        y2 = self.filter2.weights @ x
        self._adapt_lambda(d, y1, y2)
        return self.combiner.lam

    def _adapt_lambda(self, d, y1, y2):
        c = self.combiner
        e = d - (c.lam * y1 + (1.0 - c.lam) * y2)
        c.lam = combiner_update(c.lam, e, y1 - y2, c.mu_lambda, c.reg)
        return e

    def step(self, x, d):
        """One iteration: overall error, then ``lam``, then both members.

        All three sub-updates read the state from the start of the
        iteration.  Returns the overall (combined) error.
        """
        x = _as_vector(x, self.taps)
        d = _as_desired(d, self.filter1.weights)
        _check_finite(x, d)
        y1 = self.filter1.weights @ x
        y2 = self.filter2.weights @ x
        e = self._adapt_lambda(d, y1, y2)
        self.filter1._update(x, d - y1)
        self.filter2._update(x, d - y2)
        return e


# Functional aliases matching the operation names used elsewhere.

def predict(filt, x):
    return filt.predict(x)


def lms_step(filt, x, d):
    return filt.step(x, d)


def l0lms_step(filt, x, d):
    if not isinstance(filt, L0lmsFilter):
        raise TypeError("l0lms_step needs an L0lmsFilter")
    return filt.step(x, d)


def combined_predict(cf, x):
    return cf.predict(x)


def equivalent_weights(cf):
    return cf.equivalent_weights()


def combiner_step(cf, x, d):
    return cf.combiner_step(x, d)


def combined_step(cf, x, d):
    return cf.step(x, d)
