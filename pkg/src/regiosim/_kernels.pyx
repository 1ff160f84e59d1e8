# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled RK4 integrator for the log-state growth system."""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, fabs, isfinite

cnp.import_array()

BACKEND = "compiled"


cdef bint _deriv(double[::1] lnA, double[::1] lnK, double[::1] lnL,
                 const double[:, ::1] W, const double[::1] mu, const double[::1] cK,
                 double ln_cA, double alpha, double beta, double gamma, double theta,
                 double[::1] gA, double[::1] gK) noexcept nogil:
    cdef Py_ssize_t i, j, N = lnA.shape[0]
    cdef double s
    for i in range(N):
        s = 0.0
        for j in range(N):
            s += W[i, j] * lnA[j]
        gA[i] = exp(ln_cA + beta * lnK[i] + gamma * lnL[i] + (theta - 1.0) * lnA[i] + mu[i] * s)
        gK[i] = cK[i] * exp((1.0 - alpha) * (lnA[i] + lnL[i] - lnK[i]))
        if not (isfinite(gA[i]) and isfinite(gK[i])):
            return False
    return True


def integrate(lnA0, lnK0, lnL0, W, mu, n, cK, double ln_cA, double alpha, double beta,
              double gamma, double theta, double dt, Py_ssize_t n_steps, double tol,
              Py_ssize_t record_every=1):
    """Advance the system ``n_steps`` RK4 steps of size ``dt``.

    Returns ``(steps, lnA, lnK, lnL, gA, gK, status)`` where ``steps`` holds the
    step index of every recorded row and ``status`` is 0 (completed),
    1 (successive-difference stop below ``tol``) or 2 (non-finite state).
    """
    cdef double[::1] a = np.array(lnA0, dtype=np.float64)
    cdef double[::1] k = np.array(lnK0, dtype=np.float64)
    cdef double[::1] l = np.array(lnL0, dtype=np.float64)
    cdef const double[:, ::1] Wv = np.ascontiguousarray(W, dtype=np.float64)
    cdef const double[::1] muv = np.ascontiguousarray(mu, dtype=np.float64)
    cdef const double[::1] nv = np.ascontiguousarray(n, dtype=np.float64)
    cdef const double[::1] cKv = np.ascontiguousarray(cK, dtype=np.float64)
    cdef Py_ssize_t N = a.shape[0], i, step, row = 0
    if record_every < 1:
        record_every = 1
    cdef Py_ssize_t max_rows = n_steps // record_every + 2
    steps_out = np.empty(max_rows, dtype=np.int64)
    out = np.empty((5, max_rows, N), dtype=np.float64)
    cdef double[:, :, ::1] o = out
    cdef cnp.int64_t[::1] so = steps_out

    cdef double[::1] gA = np.empty(N), gK = np.empty(N)
    cdef double[::1] gA_prev = np.empty(N)
    cdef double[::1] k1a = np.empty(N), k1k = np.empty(N)
    cdef double[::1] k2a = np.empty(N), k2k = np.empty(N)
    cdef double[::1] k3a = np.empty(N), k3k = np.empty(N)
    cdef double[::1] k4a = np.empty(N), k4k = np.empty(N)
    cdef double[::1] ta = np.empty(N), tk = np.empty(N), tl = np.empty(N)
    cdef double h2 = 0.5 * dt, h6 = dt / 6.0, diff
    cdef int status = 0
    cdef bint recorded

    if not _deriv(a, k, l, Wv, muv, cKv, ln_cA, alpha, beta, gamma, theta, gA, gK):
        status = 2
    for i in range(N):
        o[0, 0, i] = a[i]; o[1, 0, i] = k[i]; o[2, 0, i] = l[i]
        o[3, 0, i] = gA[i]; o[4, 0, i] = gK[i]
    so[0] = 0
    row = 1

    step = 0
    with nogil:
        while status == 0 and step < n_steps:
            # k1 is the derivative at the current state, already in gA/gK
            for i in range(N):
                k1a[i] = gA[i]; k1k[i] = gK[i]; gA_prev[i] = gA[i]
                ta[i] = a[i] + h2 * k1a[i]; tk[i] = k[i] + h2 * k1k[i]; tl[i] = l[i] + h2 * nv[i]
            if not _deriv(ta, tk, tl, Wv, muv, cKv, ln_cA, alpha, beta, gamma, theta, k2a, k2k):
                status = 2
                break
            for i in range(N):
                ta[i] = a[i] + h2 * k2a[i]; tk[i] = k[i] + h2 * k2k[i]
            if not _deriv(ta, tk, tl, Wv, muv, cKv, ln_cA, alpha, beta, gamma, theta, k3a, k3k):
                status = 2
                break
            for i in range(N):
                ta[i] = a[i] + dt * k3a[i]; tk[i] = k[i] + dt * k3k[i]; tl[i] = l[i] + dt * nv[i]
            if not _deriv(ta, tk, tl, Wv, muv, cKv, ln_cA, alpha, beta, gamma, theta, k4a, k4k):
                status = 2
                break
            for i in range(N):
                a[i] = a[i] + h6 * (k1a[i] + 2.0 * k2a[i] + 2.0 * k3a[i] + k4a[i])
                k[i] = k[i] + h6 * (k1k[i] + 2.0 * k2k[i] + 2.0 * k3k[i] + k4k[i])
                l[i] = l[i] + dt * nv[i]
            step += 1
            if not _deriv(a, k, l, Wv, muv, cKv, ln_cA, alpha, beta, gamma, theta, gA, gK):
                status = 2
                break
            diff = 0.0
            for i in range(N):
                if fabs(gA[i] - gA_prev[i]) > diff:
                    diff = fabs(gA[i] - gA_prev[i])
            if diff < tol:
                status = 1
            if status == 1 or step == n_steps or step % record_every == 0:
                for i in range(N):
                    o[0, row, i] = a[i]; o[1, row, i] = k[i]; o[2, row, i] = l[i]
                    o[3, row, i] = gA[i]; o[4, row, i] = gK[i]
                so[row] = step
                row += 1

    return (steps_out[:row].copy(), out[0, :row].copy(), out[1, :row].copy(), out[2, :row].copy(),
            out[3, :row].copy(), out[4, :row].copy(), status)
