# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled per-datum likelihood kernels.

Same call surface as the numpy reference module ``_ref``; see there for the
argument conventions.  Sums accumulate sequentially in index order.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, log, log1p

cnp.import_array()

cdef double HALF_LOG_2PI = 0.5 * log(2.0 * 3.141592653589793115997963468544185161590576171875)


cdef inline double log_sigmoid(double z) nogil:
    if z >= 0.0:
        return -log1p(exp(-z))
    return z - log1p(exp(z))


cdef inline double rowdot(const double[:, ::1] X, Py_ssize_t i, const double[::1] th) nogil:
    cdef double s = 0.0
    cdef Py_ssize_t j
    for j in range(X.shape[1]):
        s += X[i, j] * th[j]
    return s


# ---------------------------------------------------------------------------
# gaussian family, theta = (mu, log sigma)
# ---------------------------------------------------------------------------

def gauss_loglik(const double[::1] x, idx, double mu, double logsig):
    cdef double a = exp(-2.0 * logsig)
    cdef double c0 = -HALF_LOG_2PI - logsig
    cdef double b = 0.5 * a
    cdef Py_ssize_t m = x.shape[0] if idx is None else len(idx)
    out_arr = np.empty(m, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef const long long[::1] iv
    cdef Py_ssize_t k
    cdef double r
    if idx is None:
        for k in range(m):
            r = x[k] - mu
            out[k] = c0 - b * (r * r)
    else:
        iv = idx
        for k in range(m):
            r = x[iv[k]] - mu
            out[k] = c0 - b * (r * r)
    return out_arr


def gauss_loglik_sum(const double[::1] x, double mu, double logsig):
    cdef double a = exp(-2.0 * logsig)
    cdef double c0 = -HALF_LOG_2PI - logsig
    cdef double b = 0.5 * a
    cdef double s = 0.0
    cdef double r
    cdef Py_ssize_t i
    for i in range(x.shape[0]):
        r = x[i] - mu
        s += c0 - b * (r * r)
    return s


def gauss_ratios(const double[::1] x, idx, const double[::1] th0, const double[::1] th1):
    cdef double a0 = exp(-2.0 * th0[1])
    cdef double a1 = exp(-2.0 * th1[1])
    cdef double ds = th0[1] - th1[1]
    cdef double mu0 = th0[0], mu1 = th1[0]
    cdef Py_ssize_t m = x.shape[0] if idx is None else len(idx)
    out_arr = np.empty(m, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef const long long[::1] iv
    cdef Py_ssize_t k, i
    cdef double r0, r1
    if idx is None:
        for k in range(m):
            r0 = x[k] - mu0
            r1 = x[k] - mu1
            out[k] = ds - 0.5 * (a1 * (r1 * r1) - a0 * (r0 * r0))
    else:
        iv = idx
        for k in range(m):
            i = iv[k]
            r0 = x[i] - mu0
            r1 = x[i] - mu1
            out[k] = ds - 0.5 * (a1 * (r1 * r1) - a0 * (r0 * r0))
    return out_arr


def gauss_corrected_ratios(const double[::1] x, idx, const double[::1] th0,
                           const double[::1] th1, const double[::1] tstar,
                           const double[:, ::1] g, const double[:, ::1] h):
    cdef double a0 = exp(-2.0 * th0[1])
    cdef double a1 = exp(-2.0 * th1[1])
    cdef double ds = th0[1] - th1[1]
    cdef double mu0 = th0[0], mu1 = th1[0]
    cdef double d00 = th0[0] - tstar[0], d01 = th0[1] - tstar[1]
    cdef double d10 = th1[0] - tstar[0], d11 = th1[1] - tstar[1]
    cdef double dmu = th1[0] - th0[0], dls = th1[1] - th0[1]
    cdef Py_ssize_t m = x.shape[0] if idx is None else len(idx)
    out_arr = np.empty(m, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef const long long[::1] iv = None if idx is None else idx
    cdef Py_ssize_t k, i
    cdef double r0, r1, raw, quad0, quad1, prox
    for k in range(m):
        i = k if iv is None else iv[k]
        r0 = x[i] - mu0
        r1 = x[i] - mu1
        raw = ds - 0.5 * (a1 * (r1 * r1) - a0 * (r0 * r0))
        quad0 = h[i, 0] * (d00 * d00) + 2.0 * h[i, 1] * (d00 * d01) + h[i, 2] * (d01 * d01)
        quad1 = h[i, 0] * (d10 * d10) + 2.0 * h[i, 1] * (d10 * d11) + h[i, 2] * (d11 * d11)
        prox = g[i, 0] * dmu + g[i, 1] * dls + 0.5 * (quad1 - quad0)
        out[k] = raw - prox
    return out_arr


# ---------------------------------------------------------------------------
# logistic regression, labels t in {-1, +1}
# ---------------------------------------------------------------------------

def logistic_loglik(const double[:, ::1] X, const double[::1] t, idx, const double[::1] theta):
    cdef Py_ssize_t m = X.shape[0] if idx is None else len(idx)
    out_arr = np.empty(m, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef const long long[::1] iv = None if idx is None else idx
    cdef Py_ssize_t k, i
    for k in range(m):
        i = k if iv is None else iv[k]
        out[k] = log_sigmoid(t[i] * rowdot(X, i, theta))
    return out_arr


def logistic_loglik_sum(const double[:, ::1] X, const double[::1] t, const double[::1] theta):
    cdef double s = 0.0
    cdef Py_ssize_t i
    for i in range(X.shape[0]):
        s += log_sigmoid(t[i] * rowdot(X, i, theta))
    return s


def logistic_ratios(const double[:, ::1] X, const double[::1] t, idx,
                    const double[::1] th0, const double[::1] th1):
    cdef Py_ssize_t m = X.shape[0] if idx is None else len(idx)
    out_arr = np.empty(m, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef const long long[::1] iv = None if idx is None else idx
    cdef Py_ssize_t k, i
    cdef double a, b
    for k in range(m):
        i = k if iv is None else iv[k]
        a = rowdot(X, i, th0)
        b = rowdot(X, i, th1)
        out[k] = log_sigmoid(t[i] * b) - log_sigmoid(t[i] * a)
    return out_arr


def logistic_corrected_ratios(const double[:, ::1] X, const double[::1] t, idx,
                              const double[::1] th0, const double[::1] th1,
                              const double[::1] tstar, const double[::1] g,
                              const double[::1] h):
    cdef Py_ssize_t m = X.shape[0] if idx is None else len(idx)
    out_arr = np.empty(m, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef const long long[::1] iv = None if idx is None else idx
    cdef Py_ssize_t k, i
    cdef double a, b, c, raw, bc, ac, prox
    for k in range(m):
        i = k if iv is None else iv[k]
        a = rowdot(X, i, th0)
        b = rowdot(X, i, th1)
        c = rowdot(X, i, tstar)
        raw = log_sigmoid(t[i] * b) - log_sigmoid(t[i] * a)
        bc = b - c
        ac = a - c
        prox = g[i] * (b - a) + 0.5 * h[i] * (bc * bc - ac * ac)
        out[k] = raw - prox
    return out_arr


# ---------------------------------------------------------------------------
# gamma regression with known shape kappa, log mean = x . theta
# ---------------------------------------------------------------------------

def gamma_loglik(const double[:, ::1] X, const double[::1] y, idx, double kappa,
                 const double[::1] theta):
    cdef Py_ssize_t m = X.shape[0] if idx is None else len(idx)
    out_arr = np.empty(m, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef const long long[::1] iv = None if idx is None else idx
    cdef Py_ssize_t k, i
    cdef double a
    for k in range(m):
        i = k if iv is None else iv[k]
        a = rowdot(X, i, theta)
        out[k] = -kappa * (y[i] * exp(-a) + a)
    return out_arr


def gamma_loglik_sum(const double[:, ::1] X, const double[::1] y, double kappa,
                     const double[::1] theta):
    cdef double s = 0.0
    cdef double a
    cdef Py_ssize_t i
    for i in range(X.shape[0]):
        a = rowdot(X, i, theta)
        s += -kappa * (y[i] * exp(-a) + a)
    return s


def gamma_ratios(const double[:, ::1] X, const double[::1] y, idx, double kappa,
                 const double[::1] th0, const double[::1] th1):
    cdef Py_ssize_t m = X.shape[0] if idx is None else len(idx)
    out_arr = np.empty(m, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef const long long[::1] iv = None if idx is None else idx
    cdef Py_ssize_t k, i
    cdef double a, b
    for k in range(m):
        i = k if iv is None else iv[k]
        a = rowdot(X, i, th0)
        b = rowdot(X, i, th1)
        out[k] = kappa * (y[i] * (exp(-a) - exp(-b)) + (a - b))
    return out_arr


def gamma_corrected_ratios(const double[:, ::1] X, const double[::1] y, idx,
                           double kappa, const double[::1] th0, const double[::1] th1,
                           const double[::1] tstar, const double[::1] g,
                           const double[::1] h):
    cdef Py_ssize_t m = X.shape[0] if idx is None else len(idx)
    out_arr = np.empty(m, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef const long long[::1] iv = None if idx is None else idx
    cdef Py_ssize_t k, i
    cdef double a, b, c, raw, bc, ac, prox
    for k in range(m):
        i = k if iv is None else iv[k]
        a = rowdot(X, i, th0)
        b = rowdot(X, i, th1)
        c = rowdot(X, i, tstar)
        raw = kappa * (y[i] * (exp(-a) - exp(-b)) + (a - b))
        bc = b - c
        ac = a - c
        prox = g[i] * (b - a) + 0.5 * h[i] * (bc * bc - ac * ac)
        out[k] = raw - prox
    return out_arr
