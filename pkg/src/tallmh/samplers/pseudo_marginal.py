"""Unbiased likelihood estimation from subsamples, and the chain it induces.

The estimator debiases exp(n ell_hat) through a randomly truncated series:
with D_j = (n/t) sum of a fresh size-t subsample's log likelihoods minus
n a(theta), and N geometric with P(N >= k) = (1+eps)^-k,

    Y = e^{n a} (1 + sum_{k=1}^N (1+eps)^k (prod_{j<=k} D_j) / k!).

Y is nonnegative whenever a(theta) lower-bounds every per-datum log
likelihood, and E[Y] = exp(n ell(theta)).  Its variance grows exponentially
with n, which is the point: the pseudo-marginal chain built on Y stalls on
tall data.  A closed-form lower bound on the leading term of that variance
is provided, as is the brightness-noise variance of the firefly extended
target under independent Bernoulli auxiliaries.
"""

from __future__ import annotations

import math
import warnings

import numpy as np

from .base import ChainTrace, ScaleAdapter, accept_decision, make_streams


def _draw_n_terms(eps: float, rng) -> int:
    # failures before first success at p = eps/(1+eps): P(N >= k) = (1+eps)^-k
    return int(rng.geometric(eps / (1.0 + eps))) - 1


def _subsample_mean(model, dataset, theta, t, rng) -> float:
    idx = rng.integers(0, dataset.n, size=t)
    return float(model.log_lik(dataset, idx, theta).mean())


def rhee_glynn_estimate(model, dataset, theta, a_theta: float, t: int,
                        eps: float, rng, counter=None) -> float:
    """One draw of the truncated-series estimator Y (plain float arithmetic;
    intended for small n, where e^{n a} is representable)."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    n = dataset.n
    n_terms = _draw_n_terms(eps, rng)
    if counter is not None:
        counter.add(t * n_terms)
    acc = 1.0
    term = 1.0
    for k in range(1, n_terms + 1):
        d = n * (_subsample_mean(model, dataset, theta, t, rng) - a_theta)
        term *= d * (1.0 + eps) / k
        acc += term
    return math.exp(n * a_theta) * acc


def rhee_glynn_log_estimate(model, dataset, theta, a_theta: float, t: int,
                            eps: float, rng, counter=None):
    """(log Y, evals): overflow-safe version used inside the chain.

    Requires a_theta to actually lower-bound the subsampled log likelihood
    means (all D_j >= 0), which holds whenever a_theta <= min_i ell_i.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    n = dataset.n
    n_terms = _draw_n_terms(eps, rng)
    evals = t * n_terms
    if counter is not None:
        counter.add(evals)
    log_terms = [0.0]
    lt = 0.0
    dead = False
    for k in range(1, n_terms + 1):
        d = n * (_subsample_mean(model, dataset, theta, t, rng) - a_theta)
        if d < 0:
            raise ValueError("negative series factor: a_theta is not a valid "
                             "lower bound for this dataset")
        if d == 0.0 or dead:
            dead = True
            continue
        lt += math.log(d) + math.log1p(eps) - math.log(k)
        log_terms.append(lt)
    m = max(log_terms)
    s = sum(math.exp(v - m) for v in log_terms)
    return n * a_theta + m + math.log(s), evals


def gaussian_loglik_floor(dataset):
    """O(1) exact per-datum log likelihood floor for the gaussian family.

    Returns a(theta) = min_i ell_i(theta), computable from the dataset's
    extreme values alone.
    """
    x = dataset.X[:, 0]
    xmin, xmax = float(x.min()), float(x.max())
    half_log_2pi = 0.5 * math.log(2.0 * math.pi)

    def floor(theta) -> float:
        mu, logsig = float(theta[0]), float(theta[1])
        r2 = max((xmax - mu) ** 2, (xmin - mu) ** 2)
        return -half_log_2pi - logsig - 0.5 * math.exp(-2.0 * logsig) * r2

    return floor


def rhee_glynn_variance_lower_bound(n: int, sigma_t: float, gap: float,
                                    eps: float) -> float:
    """Leading-order lower bound on E[Y^2] / e^{2 n ell}, the squared
    relative size of the estimator.

    gap is ell(theta) - a(theta) and sigma_t the standard deviation of one
    subsampled mean.  Only the dominant term of the second moment is kept,
    so this understates the true variance.  Saturates to +inf once the
    exponent leaves float range, which happens at quite moderate n.
    """
    s = math.sqrt((1.0 + eps) * (sigma_t**2 + gap**2))
    arg = -2.0 * n * gap + 2.0 * n * s
    if arg > 700.0:
        return math.inf
    return math.exp(arg) / (n * s)


def firefly_pm_variance(log_liks, log_bounds, i_theta: float) -> float:
    """Variance of the firefly extended-target log likelihood when each z_i
    is an independent Bernoulli(1 - i_theta) draw.

    Returns +inf (with a warning) when some bound is tight and i_theta is
    interior, since a tight bound makes the bright-point density vanish.
    """
    if not 0.0 <= i_theta <= 1.0:
        raise ValueError("i_theta must lie in [0, 1]")
    ell = np.asarray(log_liks, dtype=np.float64)
    b = np.asarray(log_bounds, dtype=np.float64)
    gap = ell - b
    if (gap < 0).any():
        raise ValueError("bounds must not exceed log likelihoods")
    if i_theta in (0.0, 1.0):
        return 0.0
    if (gap == 0).any():
        warnings.warn("tight lower bound with interior i_theta: "
                      "infinite brightness variance")
        return math.inf
    delta = np.log(np.expm1(gap)) + math.log(i_theta / (1.0 - i_theta))
    return float(i_theta * (1.0 - i_theta) * (delta * delta).sum())


def pm_mh_run(model, dataset, proposal, theta0, n_iter: int, seed: int,
              t: int, eps: float, a_fn, counter=None) -> ChainTrace:
    """Pseudo-marginal MH where the likelihood is replaced by log Y.

    The estimate at the current state is the one drawn when it was last
    proposed.  Per-iteration evaluation counts are t times the number of
    series terms, which is unbounded; the trace is marked accordingly.
    """
    model.validate(dataset)
    streams = make_streams(seed)
    adapter = ScaleAdapter(proposal)
    theta = np.asarray(theta0, dtype=np.float64).copy()
    n = dataset.n

    log_y, _ = rhee_glynn_log_estimate(model, dataset, theta, a_fn(theta),
                                       t, eps, streams.subsample, counter)
    states = np.empty((n_iter, theta.shape[0]))
    accepted = np.empty(n_iter, dtype=bool)
    evals = np.empty(n_iter, dtype=np.int64)

    for k in range(1, n_iter + 1):
        theta_p = proposal.propose(theta, adapter.scale, streams.proposal)
        u = streams.uniform.random()
        log_y_p, used = rhee_glynn_log_estimate(
            model, dataset, theta_p, a_fn(theta_p), t, eps,
            streams.subsample, counter)
        gap = (model.prior.log_density(theta_p) - model.prior.log_density(theta)
               + proposal.log_q_ratio(theta, theta_p))
        ok = accept_decision(u, (log_y_p - log_y) + gap)
        if ok:
            theta, log_y = theta_p, log_y_p
        adapter.update(k, ok)
        states[k - 1] = theta
        accepted[k - 1] = ok
        evals[k - 1] = used

    return ChainTrace(
        states=states, accepted=accepted, evals=evals, n_data=n, seed=seed,
        sampler="pseudo_marginal",
        meta={"t": t, "eps": eps, "unbounded_evals": True,
              "final_scale": adapter.scale, "proposal_scale0": proposal.scale},
    )
