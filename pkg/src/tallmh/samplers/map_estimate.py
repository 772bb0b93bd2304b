"""Posterior mode search used to center chains and proxies."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class MapResult:
    theta: np.ndarray
    converged: bool
    n_iter: int
    grad_norm: float


def _log_post(model, dataset, theta):
    return model.full_log_lik(dataset, theta) + model.prior.log_density(theta)


def _default_init(model, dataset):
    if model.family == "gaussian":
        x = dataset.X[:, 0]
        var = float(x.var())
        return np.array([float(x.mean()), 0.5 * np.log(max(var, 1e-300))])
    return np.zeros(model.param_dim(dataset))


def find_map(model, dataset, theta_init=None, tol: float = 1e-8,
             max_iter: int = 200) -> MapResult:
    """Damped Newton ascent on the log posterior.

    Falls back to a scaled gradient step whenever the Newton direction is
    unusable, and halves the step until the log posterior improves.  The
    run is deterministic.  Convergence means the gradient sup norm fell
    below tol; otherwise the best iterate is returned with converged False.
    """
    theta = (np.asarray(theta_init, dtype=np.float64).copy()
             if theta_init is not None else _default_init(model, dataset))
    f = _log_post(model, dataset, theta)
    k = 0
    for k in range(1, max_iter + 1):
        grad = model.full_grad(dataset, theta) + model.prior.grad(theta)
        gnorm = float(np.abs(grad).max())
        if gnorm < tol:
            return MapResult(theta=theta, converged=True, n_iter=k - 1,
                             grad_norm=gnorm)
        hess = model.full_hess(dataset, theta) + model.prior.hess(theta)
        step = None
        try:
            cand = np.linalg.solve(hess, -grad)
            if np.isfinite(cand).all() and float(cand @ grad) > 0:
                step = cand
        except np.linalg.LinAlgError:
            pass
        if step is None:
            step = grad / max(gnorm, 1.0)
        scale = 1.0
        improved = False
        for _ in range(60):
            trial = theta + scale * step
            ft = _log_post(model, dataset, trial)
            if np.isfinite(ft) and ft > f:
                theta, f = trial, ft
                improved = True
                break
            scale *= 0.5
        if not improved:
            break
    grad = model.full_grad(dataset, theta) + model.prior.grad(theta)
    gnorm = float(np.abs(grad).max())
    return MapResult(theta=theta, converged=gnorm < tol, n_iter=k,
                     grad_norm=gnorm)
