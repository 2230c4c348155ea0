"""Pure numpy implementation of the per-trial filter-bank loops.

Mirrors ``_kernels.pyx`` argument for argument.  Arrays passed as state
(``W``, ``W1``, ``W2``, ``lam``) are updated in place; ``*_out`` arrays are
filled row by row.  ``reg < 0`` selects the unnormalised combiner rule.
"""

import numpy as np

from .filters import combiner_update, l0lms_update, lms_update


def run_filter_bank(X, D, H, W, mu, beta, alpha, mse_out, err_out):
    w = np.array(W, dtype=np.float64)
    sparse = beta > 0.0
    for t in range(X.shape[0]):
        x = X[t]
        diff = H - w
        mse_out[t] = np.sum(diff * diff)
        e = D[t] - w @ x
        err_out[t] = e
        if sparse:
            w = l0lms_update(w, x, e, mu, beta, alpha)
        else:
            w = lms_update(w, x, e, mu)
    W[...] = w


def run_combined_bank(X, D, H, W1, W2, lam, mu1, mu2, beta, alpha, mu_lambda, reg,
                      mse_out, lam_out, err_out):
    w1 = np.array(W1, dtype=np.float64)
    w2 = np.array(W2, dtype=np.float64)
    lm = np.array(lam, dtype=np.float64)
    sparse = beta > 0.0
    creg = None if reg < 0.0 else reg
    for t in range(X.shape[0]):
        x = X[t]
        d = D[t]
        lam_out[t] = lm
        diff = H - (lm[:, None] * (w1 - w2) + w2)
        mse_out[t] = np.sum(diff * diff)
        y1 = w1 @ x
        y2 = w2 @ x
        e = d - (lm * y1 + (1.0 - lm) * y2)
        err_out[t] = e
        lm = combiner_update(lm, e, y1 - y2, mu_lambda, creg)
        if sparse:
            w1 = l0lms_update(w1, x, d - y1, mu1, beta, alpha)
            w2 = l0lms_update(w2, x, d - y2, mu2, beta, alpha)
        else:
            w1 = lms_update(w1, x, d - y1, mu1)
            w2 = lms_update(w2, x, d - y2, mu2)
    W1[...] = w1
    W2[...] = w2
    lam[...] = lm
