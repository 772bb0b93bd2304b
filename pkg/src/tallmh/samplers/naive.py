"""What goes wrong when subsampled log likelihoods are simply plugged in.

For a Bernoulli(lam) inclusion mask z, the "unbiased" plug-in uses
sum_i z_i ell_i / lam (an unbiased estimate of the log likelihood) and the
"biased" one sum_i z_i ell_i.  Exponentiating either does not leave the
posterior invariant: the induced target is proportional to the expectation
of the exponentiated estimate, which factorizes as

    unbiased:  prod_i [lam e^{ell_i / lam} + (1 - lam)]
    biased:    prod_i [lam e^{ell_i}       + (1 - lam)].

This demonstrator estimates that induced target on a grid of parameter
values by Monte Carlo and returns it next to the true posterior for
comparison.  Meant for small n; the replicate mask matrix is dense.
"""

from __future__ import annotations

import numpy as np
from scipy.special import logsumexp

_ESTIMATORS = ("unbiased", "biased")


def naive_subsample_demo(model, dataset, lam: float, estimator: str,
                         theta_grid, n_mc: int, seed: int) -> dict:
    """Monte Carlo view of the target induced by naive subsampling.

    Returns a dict with the grid, the exact and induced log targets (both
    normalized over the grid), their probability vectors, and the raw
    log mean estimate per grid point.
    """
    if not 0 < lam <= 1:
        raise ValueError("lam must lie in (0, 1]")
    if estimator not in _ESTIMATORS:
        raise ValueError("estimator must be one of %s" % (_ESTIMATORS,))
    model.validate(dataset)
    theta_grid = np.atleast_2d(np.asarray(theta_grid, dtype=np.float64))
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    n = dataset.n

    log_exact = np.empty(theta_grid.shape[0])
    log_mc_mean = np.empty(theta_grid.shape[0])
    log_prior = np.empty(theta_grid.shape[0])
    for j, theta in enumerate(theta_grid):
        ell = model.log_lik(dataset, None, theta)
        log_prior[j] = model.prior.log_density(theta)
        log_exact[j] = float(ell.sum())
        z = rng.random((n_mc, n)) < lam
        vals = z @ ell
        if estimator == "unbiased":
            vals = vals / lam
        log_mc_mean[j] = float(logsumexp(vals) - np.log(n_mc))

    lt = log_prior + log_exact
    li = log_prior + log_mc_mean
    return {
        "theta_grid": theta_grid,
        "log_target": lt - logsumexp(lt),
        "log_induced": li - logsumexp(li),
        "target": np.exp(lt - logsumexp(lt)),
        "induced": np.exp(li - logsumexp(li)),
        "log_mc_mean": log_mc_mean,
        "lam": lam,
        "estimator": estimator,
        "n_mc": n_mc,
    }
