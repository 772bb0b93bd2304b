"""Pure numpy implementations of the per-datum likelihood kernels.

This module mirrors the signatures of the optional compiled extension
(`tallmh._kernels._fast`); one of the two is selected at import time by
``tallmh._kernels``.  Every function takes C-contiguous float64 arrays.
``idx`` is either ``None`` (all rows, in order) or an int64 index array.

Full-data sums accumulate in index order (via ``cumsum``) rather than with
pairwise summation, so that a sum of single-datum calls reproduces the same
float bit for bit.
"""

import numpy as np

_HALF_LOG_2PI = 0.5 * np.log(2.0 * np.pi)


def _seq_sum(values):
    """Sum a 1-d float64 array in index order."""
    if values.size == 0:
        return 0.0
    return float(np.cumsum(values)[-1])


def _take(arr, idx):
    return arr if idx is None else arr[idx]


def _rowdot(X, theta):
    # (X * theta).sum(axis=1) reduces each row left to right for the small
    # feature counts used here, unlike a BLAS matvec whose blocking may vary
    # with the number of rows.
    return (X * theta).sum(axis=1)


def _log_sigmoid(z):
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = -np.log1p(np.exp(-z[pos]))
    neg = ~pos
    out[neg] = z[neg] - np.log1p(np.exp(z[neg]))
    return out


# ---------------------------------------------------------------------------
# gaussian family, theta = (mu, log sigma)
# ---------------------------------------------------------------------------

def gauss_loglik(x, idx, mu, logsig):
    xv = _take(x, idx)
    r = xv - mu
    a = np.exp(-2.0 * logsig)
    c0 = -_HALF_LOG_2PI - logsig
    b = 0.5 * a
    return c0 - b * (r * r)


def gauss_loglik_sum(x, mu, logsig):
    return _seq_sum(gauss_loglik(x, None, mu, logsig))


def gauss_ratios(x, idx, th0, th1):
    xv = _take(x, idx)
    r0 = xv - th0[0]
    r1 = xv - th1[0]
    a0 = np.exp(-2.0 * th0[1])
    a1 = np.exp(-2.0 * th1[1])
    return (th0[1] - th1[1]) - 0.5 * (a1 * (r1 * r1) - a0 * (r0 * r0))


def gauss_corrected_ratios(x, idx, th0, th1, tstar, g, h):
    """Per-datum log ratio minus its second-order Taylor prediction.

    g is (n, 2): per-datum gradient at tstar.  h is (n, 3): the packed
    symmetric Hessian [h00, h01, h11] at tstar.
    """
    raw = gauss_ratios(x, idx, th0, th1)
    gv = _take(g, idx)
    hv = _take(h, idx)
    d0 = th0 - tstar
    d1 = th1 - tstar
    quad0 = hv[:, 0] * (d0[0] * d0[0]) + 2.0 * hv[:, 1] * (d0[0] * d0[1]) \
        + hv[:, 2] * (d0[1] * d0[1])
    quad1 = hv[:, 0] * (d1[0] * d1[0]) + 2.0 * hv[:, 1] * (d1[0] * d1[1]) \
        + hv[:, 2] * (d1[1] * d1[1])
    prox = gv[:, 0] * (th1[0] - th0[0]) + gv[:, 1] * (th1[1] - th0[1]) \
        + 0.5 * (quad1 - quad0)
    return raw - prox


# ---------------------------------------------------------------------------
# logistic regression, labels t in {-1, +1}
# ---------------------------------------------------------------------------

def logistic_loglik(X, t, idx, theta):
    Xv = _take(X, idx)
    tv = _take(t, idx)
    return _log_sigmoid(tv * _rowdot(Xv, theta))


def logistic_loglik_sum(X, t, theta):
    return _seq_sum(logistic_loglik(X, t, None, theta))


def logistic_ratios(X, t, idx, th0, th1):
    Xv = _take(X, idx)
    tv = _take(t, idx)
    a = _rowdot(Xv, th0)
    b = _rowdot(Xv, th1)
    return _log_sigmoid(tv * b) - _log_sigmoid(tv * a)


def logistic_corrected_ratios(X, t, idx, th0, th1, tstar, g, h):
    """Per-datum log ratio minus g_i (b-a) + h_i ((b-c)^2 - (a-c)^2) / 2.

    a, b, c are the linear predictors at th0, th1 and tstar; g and h are the
    per-datum first and second derivative coefficients stored at tstar.
    """
    Xv = _take(X, idx)
    tv = _take(t, idx)
    gv = _take(g, idx)
    hv = _take(h, idx)
    a = _rowdot(Xv, th0)
    b = _rowdot(Xv, th1)
    c = _rowdot(Xv, tstar)
    raw = _log_sigmoid(tv * b) - _log_sigmoid(tv * a)
    bc = b - c
    ac = a - c
    prox = gv * (b - a) + 0.5 * hv * (bc * bc - ac * ac)
    return raw - prox


# ---------------------------------------------------------------------------
# gamma regression with known shape kappa, log mean = x . theta
# ---------------------------------------------------------------------------

def gamma_loglik(X, y, idx, kappa, theta):
    Xv = _take(X, idx)
    yv = _take(y, idx)
    a = _rowdot(Xv, theta)
    return -kappa * (yv * np.exp(-a) + a)


def gamma_loglik_sum(X, y, kappa, theta):
    return _seq_sum(gamma_loglik(X, y, None, kappa, theta))


def gamma_ratios(X, y, idx, kappa, th0, th1):
    Xv = _take(X, idx)
    yv = _take(y, idx)
    a = _rowdot(Xv, th0)
    b = _rowdot(Xv, th1)
    return kappa * (yv * (np.exp(-a) - np.exp(-b)) + (a - b))


def gamma_corrected_ratios(X, y, idx, kappa, th0, th1, tstar, g, h):
    Xv = _take(X, idx)
    yv = _take(y, idx)
    gv = _take(g, idx)
    hv = _take(h, idx)
    a = _rowdot(Xv, th0)
    b = _rowdot(Xv, th1)
    c = _rowdot(Xv, tstar)
    raw = kappa * (yv * (np.exp(-a) - np.exp(-b)) + (a - b))
    bc = b - c
    ac = a - c
    prox = gv * (b - a) + 0.5 * hv * (bc * bc - ac * ac)
    return raw - prox
