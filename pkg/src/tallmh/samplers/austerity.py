"""Subsampling MH that decides acceptances with sequential t-tests.

The acceptance comparison (mean log likelihood ratio against a threshold
derived from the uniform draw) is treated as a hypothesis test on a growing
without-replacement subsample: decide once the two-sided one-sample t-test
p-value drops below eps_pvalue, otherwise enlarge the subsample.  The full
dataset forces an exact decision.  The resulting chain targets the posterior
only approximately; its per-iteration cost is recorded as the number of data
points inspected.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import stats

from .base import ChainTrace, ScaleAdapter, make_streams, prior_proposal_gap


def austerity_decision(model, dataset, theta, theta_p, u: float, pq_gap: float,
                       sub_rng, eps_pvalue: float = 0.05, t_init: int = 100,
                       growth: float = 2.0):
    """One t-test acceptance decision; returns (accepted, t_used).

    The standard error carries the finite-population correction
    sqrt(1 - (t-1)/(n-1)): the subsample is drawn without replacement, so
    the uncertainty about the full-data mean vanishes as t approaches n.
    Degenerate subsamples (zero variance before the data is exhausted) are
    decided immediately by the sign of the mean difference.
    """
    n = dataset.n
    psi = (math.log(u) - pq_gap) / n
    perm = sub_rng.permutation(n)
    t = min(t_init, n)
    s1 = 0.0
    s2 = 0.0
    have = 0
    while True:
        chunk = perm[have:t]
        r = model.log_lik_ratios(dataset, chunk, theta, theta_p)
        s1 += float(r.sum())
        s2 += float((r * r).sum())
        have = t
        mean = s1 / t
        if t >= n:
            return mean > psi, t
        var = max(s2 / t - mean * mean, 0.0) * t / (t - 1)
        if var == 0.0:
            return mean > psi, t
        se = math.sqrt(var / t) * math.sqrt(1.0 - (t - 1.0) / (n - 1.0))
        stat = (mean - psi) / se
        pvalue = 2.0 * float(stats.t.sf(abs(stat), t - 1))
        if pvalue < eps_pvalue:
            return mean > psi, t
        t = min(n, math.ceil(growth * t))


def austerity_run(model, dataset, proposal, theta0, n_iter: int, seed: int,
                  eps_pvalue: float = 0.05, t_init: int = 100,
                  growth: float = 2.0, counter=None) -> ChainTrace:
    if not 0 < eps_pvalue < 1:
        raise ValueError("eps_pvalue must lie in (0, 1)")
    if t_init < 2:
        raise ValueError("t_init must be at least 2")
    if growth <= 1:
        raise ValueError("growth must exceed 1")
    model.validate(dataset)
    streams = make_streams(seed)
    adapter = ScaleAdapter(proposal)
    theta = np.asarray(theta0, dtype=np.float64).copy()
    n = dataset.n

    states = np.empty((n_iter, theta.shape[0]))
    accepted = np.empty(n_iter, dtype=bool)
    evals = np.empty(n_iter, dtype=np.int64)

    for k in range(1, n_iter + 1):
        theta_p = proposal.propose(theta, adapter.scale, streams.proposal)
        u = streams.uniform.random()
        pq_gap = prior_proposal_gap(model, proposal, theta, theta_p)
        ok, t_used = austerity_decision(
            model, dataset, theta, theta_p, u, pq_gap, streams.subsample,
            eps_pvalue=eps_pvalue, t_init=t_init, growth=growth)
        if ok:
            theta = theta_p
        if counter is not None:
            counter.add(t_used)
        adapter.update(k, ok)
        states[k - 1] = theta
        accepted[k - 1] = ok
        evals[k - 1] = t_used

    return ChainTrace(
        states=states, accepted=accepted, evals=evals, n_data=n, seed=seed,
        sampler="austerity",
        meta={"eps_pvalue": eps_pvalue, "t_init": t_init, "growth": growth,
              "final_scale": adapter.scale, "proposal_scale0": proposal.scale},
    )
