"""Auxiliary-variable MH that touches only "bright" data points.

Each datum carries a binary brightness z_i.  The extended target couples
theta with z through per-datum lower bounds b_i(theta) <= ell_i(theta):

    log pi(theta, z) = log p(theta) + B(theta)
                       + sum_{i bright} log(e^{ell_i - b_i} - 1),

with B(theta) = sum_i b_i(theta).  Here the bounds come from a Taylor proxy
anchored at theta_star: b_i = taylor_i(theta) - (M/6) D(theta)^3 with D the
family displacement norm, so B(theta) is an O(1) aggregate and individual
b_i are cheap record lookups.  A sweep is one MH move on theta (evaluating
the exact likelihood only at bright points) followed by a Bernoulli refresh
of a uniformly chosen fraction of the z's.  Per-sweep cost is recorded as
the number of resampled z's plus the number of bright points.
"""

from __future__ import annotations

import math

import numpy as np

from ..proxy import TaylorProxy
from .base import ChainTrace, ScaleAdapter, accept_decision, make_streams

_REL_TOL = 1e-9


class FireflyBoundError(RuntimeError):
    """A lower bound exceeded the exact log likelihood, or the chain left
    the region where the bound construction is valid."""


def _check_region(proxy: TaylorProxy, theta) -> None:
    if np.isfinite(proxy.radius):
        if np.abs(theta - proxy.theta_star).max() > proxy.radius:
            raise FireflyBoundError(
                "state left the trust region of the lower bounds "
                "(|theta - anchor|_inf > %g)" % proxy.radius)


def _cube_term(proxy: TaylorProxy, theta) -> float:
    return (proxy.m3 / 6.0) * proxy.displacement_norm(theta - proxy.theta_star) ** 3


def bound_total(proxy: TaylorProxy, theta) -> float:
    """B(theta) = sum_i b_i(theta), an O(1) aggregate computation."""
    theta = np.asarray(theta, dtype=np.float64)
    _check_region(proxy, theta)
    d = theta - proxy.theta_star
    quad = proxy.mean_ell + proxy.mu_hat @ d + 0.5 * d @ (proxy.s_hat @ d)
    return proxy.n * (quad - _cube_term(proxy, theta))


def lower_bounds(model, dataset, proxy: TaylorProxy, idx, theta):
    """Per-datum b_i(theta) for the rows in idx."""
    theta = np.asarray(theta, dtype=np.float64)
    _check_region(proxy, theta)
    return model.taylor_values(dataset, idx, theta, proxy) - _cube_term(proxy, theta)


def _gaps(model, dataset, proxy, idx, theta):
    """ell_i - b_i on idx, validated nonnegative (tiny float slack clamped)."""
    ell = model.log_lik(dataset, idx, theta)
    gap = ell - lower_bounds(model, dataset, proxy, idx, theta)
    tol = _REL_TOL * np.maximum(1.0, np.abs(ell))
    if (gap < -tol).any():
        worst = int(np.argmin(gap))
        raise FireflyBoundError(
            "lower bound exceeds log likelihood at datum %d by %g"
            % (idx[worst] if idx is not None else worst, -gap[worst]))
    return np.maximum(gap, 0.0)


def _log_expm1(d):
    """log(e^d - 1) for d >= 0; -inf at 0, asymptotically d for large d."""
    with np.errstate(divide="ignore"):
        out = np.where(d > 30.0, d, np.log(np.expm1(np.minimum(d, 30.0))))
    return out


def _log_bright_part(model, dataset, proxy, bright, theta) -> float:
    if bright.size == 0:
        return 0.0
    gaps = _gaps(model, dataset, proxy, bright, theta)
    return float(_log_expm1(gaps).sum())


def firefly_run(model, dataset, proposal, theta0, n_iter: int, seed: int,
                proxy: TaylorProxy, resample_fraction: float = 0.1,
                record_z: bool = False, counter=None) -> ChainTrace:
    """Run firefly MH with Taylor lower bounds anchored in the given proxy.

    Brightness starts with a uniformly chosen 10 percent of the data on.
    Raises FireflyBoundError if a bound is found above the exact
    log likelihood or the chain leaves the bounds' trust region.

    record_z stores the brightness vector after each sweep as a packed
    integer (bit i = z_i) in meta["z_codes"]; only sensible for tiny n,
    where the joint (theta, z) occupation can be compared to exhaustive
    enumeration of the extended target.
    """
    if not 0 < resample_fraction <= 1:
        raise ValueError("resample_fraction must lie in (0, 1]")
    if record_z and dataset.n > 62:
        raise ValueError("record_z packs z into an int64; needs n <= 62")
    model.validate(dataset)
    streams = make_streams(seed)
    adapter = ScaleAdapter(proposal)
    theta = np.asarray(theta0, dtype=np.float64).copy()
    n = dataset.n

    z = np.zeros(n, dtype=bool)
    n_on = max(1, round(0.1 * n))
    z[streams.brightness.choice(n, size=n_on, replace=False)] = True
    m_resample = max(1, round(resample_fraction * n))

    states = np.empty((n_iter, theta.shape[0]))
    accepted = np.empty(n_iter, dtype=bool)
    evals = np.empty(n_iter, dtype=np.int64)
    z_codes = np.empty(n_iter, dtype=np.int64) if record_z else None
    bits = 1 << np.arange(n, dtype=np.int64) if record_z else None

    log_prior = model.prior.log_density

    for k in range(1, n_iter + 1):
        bright = np.flatnonzero(z)
        theta_p = proposal.propose(theta, adapter.scale, streams.proposal)
        u = streams.uniform.random()

        log_cur = (log_prior(theta) + bound_total(proxy, theta)
                   + _log_bright_part(model, dataset, proxy, bright, theta))
        log_prop = (log_prior(theta_p) + bound_total(proxy, theta_p)
                    + _log_bright_part(model, dataset, proxy, bright, theta_p))
        if log_cur == -math.inf and log_prop == -math.inf:
            ok = False
        else:
            ok = accept_decision(
                u, (log_prop - log_cur) + proposal.log_q_ratio(theta, theta_p))
        if ok:
            theta = theta_p

        sel = streams.brightness.choice(n, size=m_resample, replace=False)
        gaps = _gaps(model, dataset, proxy, sel, theta)
        p_on = -np.expm1(-gaps)
        z[sel] = streams.brightness.random(m_resample) < p_on

        if counter is not None:
            counter.add(m_resample + bright.size)
        adapter.update(k, ok)
        states[k - 1] = theta
        accepted[k - 1] = ok
        evals[k - 1] = m_resample + bright.size
        if record_z:
            z_codes[k - 1] = int(bits[z].sum())

    meta = {"resample_fraction": resample_fraction,
            "final_scale": adapter.scale, "proposal_scale0": proposal.scale,
            "final_bright": int(z.sum())}
    if record_z:
        meta["z_codes"] = z_codes
    return ChainTrace(
        states=states, accepted=accepted, evals=evals, n_data=n, seed=seed,
        sampler="firefly", meta=meta,
    )
