# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled per-trial filter-bank loops.

Same contract as ``_kernels_py``: state arrays are updated in place and
``reg < 0`` selects the unnormalised combiner rule.  Reductions use four
partial sums, so results match the numpy backend to rounding, not bitwise.
"""

cdef inline double _dot(const double* w, const double* x, Py_ssize_t m) noexcept nogil:
    cdef double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0
    cdef Py_ssize_t j = 0
    while j + 4 <= m:
        s0 += w[j] * x[j]
        s1 += w[j + 1] * x[j + 1]
        s2 += w[j + 2] * x[j + 2]
        s3 += w[j + 3] * x[j + 3]
        j += 4
    while j < m:
        s0 += w[j] * x[j]
        j += 1
    return (s0 + s1) + (s2 + s3)


cdef inline double _sqdist(const double* h, const double* w, Py_ssize_t m) noexcept nogil:
    cdef double s0 = 0.0, s1 = 0.0, d0, d1
    cdef Py_ssize_t j = 0
    while j + 2 <= m:
        d0 = h[j] - w[j]
        d1 = h[j + 1] - w[j + 1]
        s0 += d0 * d0
        s1 += d1 * d1
        j += 2
    while j < m:
        d0 = h[j] - w[j]
        s0 += d0 * d0
        j += 1
    return s0 + s1


cdef inline void _update(double* w, const double* x, Py_ssize_t m, double me, double mb,
                         double alpha, double a2, double zone, bint sparse) noexcept nogil:
    cdef Py_ssize_t j
    cdef double wj, v, u, g, s
    cdef int inside, flip
    if not sparse:
        for j in range(m):
            w[j] = w[j] + me * x[j]
        return
    # Branch-free: taps sit near zero, so sign tests are unpredictable.
    for j in range(m):
        wj = w[j]
        v = wj + me * x[j]
        s = <double>((wj > 0.0) - (wj < 0.0))
        inside = (wj <= zone) & (wj >= -zone)
        g = alpha * s - a2 * wj
        g = g if inside else 0.0
        u = v - mb * g
        flip = ((u > 0.0) & (v < 0.0)) | ((u < 0.0) & (v > 0.0))
        w[j] = 0.0 if flip else u


def run_filter_bank(const double[:, ::1] X, const double[:, ::1] D, const double[:, ::1] H,
                    double[:, ::1] W, double mu, double beta, double alpha,
                    double[::1] mse_out, double[:, ::1] err_out):
    cdef Py_ssize_t T = X.shape[0], m = X.shape[1], nr = W.shape[0]
    cdef Py_ssize_t t, r
    cdef double acc, e
    cdef double mb = mu * beta, a2 = alpha * alpha, zone = 1.0 / alpha
    cdef bint sparse = beta > 0.0
    cdef const double* x
    cdef double* w
    with nogil:
        for t in range(T):
            acc = 0.0
            for r in range(nr):
                acc += _sqdist(&H[r, 0], &W[r, 0], m)
            mse_out[t] = acc
            x = &X[t, 0]
            for r in range(nr):
                w = &W[r, 0]
                e = D[t, r] - _dot(w, x, m)
                err_out[t, r] = e
                _update(w, x, m, mu * e, mb, alpha, a2, zone, sparse)


def run_combined_bank(const double[:, ::1] X, const double[:, ::1] D, const double[:, ::1] H,
                      double[:, ::1] W1, double[:, ::1] W2, double[::1] lam,
                      double mu1, double mu2, double beta, double alpha,
                      double mu_lambda, double reg,
                      double[::1] mse_out, double[:, ::1] lam_out, double[:, ::1] err_out):
    cdef Py_ssize_t T = X.shape[0], m = X.shape[1], nr = W1.shape[0]
    cdef Py_ssize_t t, r, j
    cdef double acc, diff, lm, y1, y2, y12, e, d
    cdef double a2 = alpha * alpha, zone = 1.0 / alpha
    cdef double mb1 = mu1 * beta, mb2 = mu2 * beta
    cdef bint sparse = beta > 0.0
    cdef const double* x
    cdef const double* h
    cdef double* w1
    cdef double* w2
    with nogil:
        for t in range(T):
            acc = 0.0
            for r in range(nr):
                lm = lam[r]
                lam_out[t, r] = lm
                h = &H[r, 0]
                w1 = &W1[r, 0]
                w2 = &W2[r, 0]
                for j in range(m):
                    diff = h[j] - (lm * (w1[j] - w2[j]) + w2[j])
                    acc += diff * diff
            mse_out[t] = acc
            x = &X[t, 0]
            for r in range(nr):
                w1 = &W1[r, 0]
                w2 = &W2[r, 0]
                lm = lam[r]
                d = D[t, r]
                y1 = _dot(w1, x, m)
                y2 = _dot(w2, x, m)
                e = d - (lm * y1 + (1.0 - lm) * y2)
                err_out[t, r] = e
                y12 = y1 - y2
                if reg < 0.0:
                    lam[r] = lm + (mu_lambda * e) * y12
                else:
                    lam[r] = lm + (mu_lambda * e) * y12 / (reg + y12 * y12)
                _update(w1, x, m, mu1 * (d - y1), mb1, alpha, a2, zone, sparse)
                _update(w2, x, m, mu2 * (d - y2), mb2, alpha, a2, zone, sparse)
