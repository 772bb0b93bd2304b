"""Likelihood families, priors, and their derivative bounds.

Three observation models share one surface: a univariate Gaussian with
unknown mean and log standard deviation, logistic regression with labels in
{-1, +1}, and Gamma regression with known shape where the log mean is linear
in the covariates.  Each exposes per-datum log likelihoods, gradients and
Hessians, full-data sums that charge an evaluation counter, and a uniform
bound on third derivatives over a trust region (used by Taylor proxies and
by lower-bound constructions).

Per-datum batch operations route through ``tallmh._kernels`` so the compiled
backend is used when available.  Full-data sums accumulate in index order,
so they reproduce a loop over single-datum calls bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels

_K = _kernels.impl


class ModelError(ValueError):
    """Raised when a dataset does not fit the model's requirements."""


class EvalCounter:
    """Running total of per-datum likelihood evaluations."""

    def __init__(self):
        self.total = 0

    def add(self, k: int) -> None:
        self.total += int(k)

    def __repr__(self):
        return "EvalCounter(total=%d)" % self.total


def _as_idx(idx):
    if idx is None:
        return None
    return np.ascontiguousarray(idx, dtype=np.int64)


def _as_theta(theta):
    return np.ascontiguousarray(theta, dtype=np.float64)


# ---------------------------------------------------------------------------
# priors
# ---------------------------------------------------------------------------

class FlatPrior:
    """Improper uniform prior, log density 0 everywhere."""

    def log_density(self, theta) -> float:
        return 0.0

    def grad(self, theta):
        return np.zeros_like(np.asarray(theta, dtype=np.float64))

    def hess(self, theta):
        p = len(theta)
        return np.zeros((p, p))

    def describe(self) -> dict:
        return {"kind": "flat"}


@dataclass(frozen=True)
class CauchyPrior:
    """Independent Cauchy prior per coordinate."""

    loc: np.ndarray
    scale: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "loc", np.asarray(self.loc, dtype=np.float64))
        object.__setattr__(self, "scale", np.asarray(self.scale, dtype=np.float64))
        if self.loc.shape != self.scale.shape or self.loc.ndim != 1:
            raise ModelError("loc and scale must be 1-d arrays of equal length")
        if not (self.scale > 0).all():
            raise ModelError("Cauchy scales must be positive")

    def log_density(self, theta) -> float:
        z = (np.asarray(theta) - self.loc) / self.scale
        return float(np.sum(-np.log(math.pi * self.scale) - np.log1p(z * z)))

    def grad(self, theta):
        u = np.asarray(theta) - self.loc
        return -2.0 * u / (self.scale**2 + u * u)

    def hess(self, theta):
        u = np.asarray(theta) - self.loc
        s2 = self.scale**2
        return np.diag(-2.0 * (s2 - u * u) / (s2 + u * u) ** 2)

    def describe(self) -> dict:
        return {"kind": "cauchy", "loc": self.loc.tolist(), "scale": self.scale.tolist()}


def default_cauchy_prior(dataset, coef_scale: float = 2.5,
                         intercept_scale: float = 10.0) -> CauchyPrior:
    """Weakly informative Cauchy prior keyed to the dataset's column roles.

    Standardized feature columns get scale ``coef_scale``; columns marked as
    intercept get ``intercept_scale``.
    """
    roles = dataset.meta.get("column_roles", ["feature"] * dataset.d)
    scale = np.array(
        [intercept_scale if r == "intercept" else coef_scale for r in roles]
    )
    return CauchyPrior(loc=np.zeros(dataset.d), scale=scale)


# ---------------------------------------------------------------------------
# gaussian family
# ---------------------------------------------------------------------------

class GaussianModel:
    """Univariate normal data, theta = (mu, log sigma), one column of X."""

    family = "gaussian"
    bound_is_global = False

    def __init__(self, prior=None):
        self.prior = prior if prior is not None else FlatPrior()

    def param_dim(self, dataset) -> int:
        return 2

    def validate(self, dataset) -> None:
        if dataset.d != 1:
            raise ModelError("gaussian family expects a single data column")
        if dataset.y is not None:
            raise ModelError("gaussian family takes no response vector")

    def _x(self, dataset):
        return dataset.X[:, 0]

    def log_lik(self, dataset, idx, theta):
        theta = _as_theta(theta)
        return _K.gauss_loglik(self._x(dataset), _as_idx(idx), theta[0], theta[1])

    def log_lik_i(self, dataset, i, theta) -> float:
        return float(self.log_lik(dataset, np.array([i]), theta)[0])

    def full_log_lik(self, dataset, theta, counter=None) -> float:
        if counter is not None:
            counter.add(dataset.n)
        theta = _as_theta(theta)
        return _K.gauss_loglik_sum(self._x(dataset), theta[0], theta[1])

    def log_lik_ratios(self, dataset, idx, theta, theta_p):
        return _K.gauss_ratios(self._x(dataset), _as_idx(idx),
                               _as_theta(theta), _as_theta(theta_p))

    def corrected_ratios(self, dataset, idx, theta, theta_p, proxy):
        return _K.gauss_corrected_ratios(
            self._x(dataset), _as_idx(idx), _as_theta(theta), _as_theta(theta_p),
            proxy.theta_star, proxy.g, proxy.h)

    def grad_log_lik(self, dataset, idx, theta):
        x = self._x(dataset) if idx is None else self._x(dataset)[idx]
        mu, logsig = theta
        a = math.exp(-2.0 * logsig)
        r = x - mu
        out = np.empty((x.shape[0], 2))
        out[:, 0] = a * r
        out[:, 1] = -1.0 + a * r * r
        return out

    def grad_log_lik_i(self, dataset, i, theta):
        return self.grad_log_lik(dataset, np.array([i]), theta)[0]

    def hess_log_lik_i(self, dataset, i, theta):
        x = self._x(dataset)[i]
        mu, logsig = theta
        a = math.exp(-2.0 * logsig)
        r = x - mu
        return np.array([[-a, -2.0 * a * r], [-2.0 * a * r, -2.0 * a * r * r]])

    def grad_sum(self, dataset, idx, theta):
        x = self._x(dataset) if idx is None else self._x(dataset)[idx]
        mu, logsig = theta
        a = math.exp(-2.0 * logsig)
        r = x - mu
        return np.array([a * r.sum(), -r.shape[0] + a * (r * r).sum()])

    def full_grad(self, dataset, theta):
        return self.grad_sum(dataset, None, theta)

    def full_hess(self, dataset, theta):
        x = self._x(dataset)
        mu, logsig = theta
        a = math.exp(-2.0 * logsig)
        r = x - mu
        n = x.shape[0]
        s1 = r.sum()
        s2 = (r * r).sum()
        return np.array([[-a * n, -2.0 * a * s1], [-2.0 * a * s1, -2.0 * a * s2]])

    def taylor_records(self, dataset, theta_star):
        """Per-datum (loglik, gradient, packed Hessian) at theta_star.

        Returns (records, mu_hat, s_hat, mean_ell) where records has columns
        [ell, g_mu, g_s, h_mumu, h_mus, h_ss].
        """
        x = self._x(dataset)
        mu, logsig = theta_star
        a = math.exp(-2.0 * logsig)
        r = x - mu
        n = x.shape[0]
        rec = np.empty((n, 6))
        rec[:, 0] = _K.gauss_loglik(x, None, float(mu), float(logsig))
        rec[:, 1] = a * r
        rec[:, 2] = -1.0 + a * r * r
        rec[:, 3] = -a
        rec[:, 4] = -2.0 * a * r
        rec[:, 5] = -2.0 * a * r * r
        mu_hat = np.array([rec[:, 1].mean(), rec[:, 2].mean()])
        s_hat = np.array([
            [rec[:, 3].mean(), rec[:, 4].mean()],
            [rec[:, 4].mean(), rec[:, 5].mean()],
        ])
        return rec, mu_hat, s_hat, float(rec[:, 0].mean())

    def taylor_values(self, dataset, idx, theta, proxy):
        """Second-order Taylor prediction of per-datum log likelihoods."""
        d = _as_theta(theta) - proxy.theta_star
        ell = proxy.ell if idx is None else proxy.ell[idx]
        g = proxy.g if idx is None else proxy.g[idx]
        h = proxy.h if idx is None else proxy.h[idx]
        quad = h[:, 0] * d[0] * d[0] + 2.0 * h[:, 1] * d[0] * d[1] + h[:, 2] * d[1] * d[1]
        return ell + g[:, 0] * d[0] + g[:, 1] * d[1] + 0.5 * quad

    def third_deriv_bound(self, dataset, theta_ref, radius: float = 1.0) -> float:
        """Uniform bound on third partials over the box |theta - ref|_inf <= radius.

        The largest third partials are 2a, 4a|r| and 4ar^2 with a = e^{-2s}
        and r the residual; both are maximized at a corner of the box.
        """
        mu, logsig = theta_ref
        a_max = math.exp(-2.0 * (logsig - radius))
        r_max = float(np.max(np.abs(self._x(dataset) - mu))) + radius
        return max(2.0 * a_max, 4.0 * a_max * r_max, 4.0 * a_max * r_max * r_max)

    def displacement_norm(self, v) -> float:
        return float(np.abs(v).sum())

    norm_kind = "l1"

    def describe(self) -> dict:
        return {"family": self.family, "prior": self.prior.describe()}


# ---------------------------------------------------------------------------
# logistic regression
# ---------------------------------------------------------------------------

def _logistic_p(z):
    """phi'(z) = 1 / (1 + e^z), computed stably on both tails."""
    out = np.empty_like(z)
    pos = z >= 0
    ez = np.exp(-z[pos])
    out[pos] = ez / (1.0 + ez)
    out[~pos] = 1.0 / (1.0 + np.exp(z[~pos]))
    return out


class LogisticModel:
    """Binary regression, log lik phi(t x.theta) with phi(z) = -log(1+e^-z)."""

    family = "logistic"
    bound_is_global = True
    norm_kind = "l2"

    def __init__(self, prior=None):
        self.prior = prior if prior is not None else FlatPrior()

    def param_dim(self, dataset) -> int:
        return dataset.d

    def validate(self, dataset) -> None:
        if dataset.y is None:
            raise ModelError("logistic family needs a label vector")
        if not np.isin(dataset.y, (-1.0, 1.0)).all():
            raise ModelError("labels must be -1 or +1")

    def log_lik(self, dataset, idx, theta):
        return _K.logistic_loglik(dataset.X, dataset.y, _as_idx(idx), _as_theta(theta))

    def log_lik_i(self, dataset, i, theta) -> float:
        return float(self.log_lik(dataset, np.array([i]), theta)[0])

    def full_log_lik(self, dataset, theta, counter=None) -> float:
        if counter is not None:
            counter.add(dataset.n)
        return _K.logistic_loglik_sum(dataset.X, dataset.y, _as_theta(theta))

    def log_lik_ratios(self, dataset, idx, theta, theta_p):
        return _K.logistic_ratios(dataset.X, dataset.y, _as_idx(idx),
                                  _as_theta(theta), _as_theta(theta_p))

    def corrected_ratios(self, dataset, idx, theta, theta_p, proxy):
        return _K.logistic_corrected_ratios(
            dataset.X, dataset.y, _as_idx(idx), _as_theta(theta),
            _as_theta(theta_p), proxy.theta_star, proxy.g, proxy.h)

    def _z(self, dataset, idx, theta):
        X = dataset.X if idx is None else dataset.X[idx]
        t = dataset.y if idx is None else dataset.y[idx]
        return X, t, t * (X @ np.asarray(theta))

    def grad_log_lik(self, dataset, idx, theta):
        X, t, z = self._z(dataset, idx, theta)
        return (_logistic_p(z) * t)[:, None] * X

    def grad_log_lik_i(self, dataset, i, theta):
        return self.grad_log_lik(dataset, np.array([i]), theta)[0]

    def hess_log_lik_i(self, dataset, i, theta):
        x = dataset.X[i]
        z = dataset.y[i] * float(x @ np.asarray(theta))
        p = float(_logistic_p(np.array([z]))[0])
        return (-p * (1.0 - p)) * np.outer(x, x)

    def grad_sum(self, dataset, idx, theta):
        X, t, z = self._z(dataset, idx, theta)
        return X.T @ (_logistic_p(z) * t)

    def full_grad(self, dataset, theta):
        return self.grad_sum(dataset, None, theta)

    def full_hess(self, dataset, theta):
        X, t, z = self._z(dataset, None, theta)
        p = _logistic_p(z)
        w = -p * (1.0 - p)
        return (X * w[:, None]).T @ X

    def taylor_records(self, dataset, theta_star):
        """Per-datum [ell, g, h] coefficients at theta_star.

        The gradient is g x_i and the Hessian h x_i x_i^T, so only the two
        scalars are stored per datum.
        """
        X, t, z = self._z(dataset, None, theta_star)
        p = _logistic_p(z)
        rec = np.empty((dataset.n, 3))
        rec[:, 0] = _K.logistic_loglik(X, t, None, _as_theta(theta_star))
        rec[:, 1] = p * t
        rec[:, 2] = -p * (1.0 - p)
        mu_hat = X.T @ rec[:, 1] / dataset.n
        s_hat = (X * rec[:, 2][:, None]).T @ X / dataset.n
        return rec, mu_hat, s_hat, float(rec[:, 0].mean())

    def taylor_values(self, dataset, idx, theta, proxy):
        X = dataset.X if idx is None else dataset.X[idx]
        ell = proxy.ell if idx is None else proxy.ell[idx]
        g = proxy.g if idx is None else proxy.g[idx]
        h = proxy.h if idx is None else proxy.h[idx]
        u = X @ (_as_theta(theta) - proxy.theta_star)
        return ell + g * u + 0.5 * h * u * u

    def third_deriv_bound(self, dataset, theta_ref, radius: float = 1.0) -> float:
        """|phi'''| <= 1/4, so the directional bound is max_i |x_i|_2^3 / 4.

        Valid everywhere; theta_ref and radius are ignored.
        """
        norms = np.sqrt((dataset.X * dataset.X).sum(axis=1))
        return 0.25 * float(norms.max()) ** 3

    def displacement_norm(self, v) -> float:
        return float(np.sqrt(np.dot(v, v)))

    def describe(self) -> dict:
        return {"family": self.family, "prior": self.prior.describe()}


# ---------------------------------------------------------------------------
# gamma regression
# ---------------------------------------------------------------------------

class GammaModel:
    """Gamma regression with known shape kappa and log mean x . theta.

    The per-datum log likelihood drops terms constant in theta:
    ell_i(theta) = -kappa (y_i e^{-x_i.theta} + x_i.theta).
    """

    family = "gamma"
    bound_is_global = False
    norm_kind = "l1"

    def __init__(self, kappa: float, prior=None):
        if kappa <= 0:
            raise ModelError("kappa must be positive")
        self.kappa = float(kappa)
        self.prior = prior if prior is not None else FlatPrior()

    def param_dim(self, dataset) -> int:
        return dataset.d

    def validate(self, dataset) -> None:
        if dataset.y is None:
            raise ModelError("gamma family needs a response vector")
        if not (dataset.y > 0).all():
            raise ModelError("gamma responses must be positive")

    def log_lik(self, dataset, idx, theta):
        return _K.gamma_loglik(dataset.X, dataset.y, _as_idx(idx), self.kappa,
                               _as_theta(theta))

    def log_lik_i(self, dataset, i, theta) -> float:
        return float(self.log_lik(dataset, np.array([i]), theta)[0])

    def full_log_lik(self, dataset, theta, counter=None) -> float:
        if counter is not None:
            counter.add(dataset.n)
        return _K.gamma_loglik_sum(dataset.X, dataset.y, self.kappa, _as_theta(theta))

    def log_lik_ratios(self, dataset, idx, theta, theta_p):
        return _K.gamma_ratios(dataset.X, dataset.y, _as_idx(idx), self.kappa,
                               _as_theta(theta), _as_theta(theta_p))

    def corrected_ratios(self, dataset, idx, theta, theta_p, proxy):
        return _K.gamma_corrected_ratios(
            dataset.X, dataset.y, _as_idx(idx), self.kappa, _as_theta(theta),
            _as_theta(theta_p), proxy.theta_star, proxy.g, proxy.h)

    def _w(self, dataset, idx, theta):
        X = dataset.X if idx is None else dataset.X[idx]
        y = dataset.y if idx is None else dataset.y[idx]
        return X, self.kappa * y * np.exp(-(X @ np.asarray(theta)))

    def grad_log_lik(self, dataset, idx, theta):
        X, w = self._w(dataset, idx, theta)
        return (w - self.kappa)[:, None] * X

    def grad_log_lik_i(self, dataset, i, theta):
        return self.grad_log_lik(dataset, np.array([i]), theta)[0]

    def hess_log_lik_i(self, dataset, i, theta):
        x = dataset.X[i]
        w = self.kappa * dataset.y[i] * math.exp(-float(x @ np.asarray(theta)))
        return -w * np.outer(x, x)

    def grad_sum(self, dataset, idx, theta):
        X, w = self._w(dataset, idx, theta)
        return X.T @ (w - self.kappa)

    def full_grad(self, dataset, theta):
        return self.grad_sum(dataset, None, theta)

    def full_hess(self, dataset, theta):
        X, w = self._w(dataset, None, theta)
        return -(X * w[:, None]).T @ X

    def taylor_records(self, dataset, theta_star):
        X, w = self._w(dataset, None, theta_star)
        rec = np.empty((dataset.n, 3))
        rec[:, 0] = _K.gamma_loglik(X, dataset.y, None, self.kappa, _as_theta(theta_star))
        rec[:, 1] = w - self.kappa
        rec[:, 2] = -w
        mu_hat = X.T @ rec[:, 1] / dataset.n
        s_hat = (X * rec[:, 2][:, None]).T @ X / dataset.n
        return rec, mu_hat, s_hat, float(rec[:, 0].mean())

    def taylor_values(self, dataset, idx, theta, proxy):
        X = dataset.X if idx is None else dataset.X[idx]
        ell = proxy.ell if idx is None else proxy.ell[idx]
        g = proxy.g if idx is None else proxy.g[idx]
        h = proxy.h if idx is None else proxy.h[idx]
        u = X @ (_as_theta(theta) - proxy.theta_star)
        return ell + g * u + 0.5 * h * u * u

    def third_deriv_bound(self, dataset, theta_ref, radius: float = 1.0) -> float:
        """Bound kappa y e^{-x.theta} |x|_inf^3 over |theta - ref|_inf <= radius.

        The exponent is bounded below over the box by
        min_i x_i.ref - radius * sum_j max_i |x_ij|.
        """
        a_ref = dataset.X @ np.asarray(theta_ref, dtype=np.float64)
        slack = radius * float(np.abs(dataset.X).max(axis=0).sum())
        a_min = float(a_ref.min()) - slack
        xinf = float(np.abs(dataset.X).max())
        return self.kappa * float(dataset.y.max()) * math.exp(-a_min) * xinf**3

    def displacement_norm(self, v) -> float:
        return float(np.abs(v).sum())

    def describe(self) -> dict:
        return {"family": self.family, "kappa": self.kappa,
                "prior": self.prior.describe()}


FAMILIES = {
    "gaussian": GaussianModel,
    "logistic": LogisticModel,
    "gamma": GammaModel,
}
