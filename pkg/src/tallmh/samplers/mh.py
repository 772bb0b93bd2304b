"""Vanilla random walk Metropolis-Hastings over the full dataset."""

from __future__ import annotations

import numpy as np

from .base import (ChainTrace, ScaleAdapter, accept_decision, log_accept_ratio,
                   make_streams, prior_proposal_gap)


def mh_run(model, dataset, proposal, theta0, n_iter: int, seed: int,
           counter=None) -> ChainTrace:
    """Run full-data MH; every iteration costs n proposed-state evaluations.

    The full log likelihood of the current state is kept from the iteration
    that produced it, so only the proposed state is evaluated each step.
    """
    model.validate(dataset)
    streams = make_streams(seed)
    adapter = ScaleAdapter(proposal)
    theta = np.asarray(theta0, dtype=np.float64).copy()
    loglik = model.full_log_lik(dataset, theta, counter)
    n = dataset.n

    states = np.empty((n_iter, theta.shape[0]))
    accepted = np.empty(n_iter, dtype=bool)
    evals = np.full(n_iter, n, dtype=np.int64)

    for k in range(1, n_iter + 1):
        theta_p = proposal.propose(theta, adapter.scale, streams.proposal)
        u = streams.uniform.random()
        loglik_p = model.full_log_lik(dataset, theta_p, counter)
        pq_gap = prior_proposal_gap(model, proposal, theta, theta_p)
        ok = accept_decision(u, log_accept_ratio(loglik, loglik_p, pq_gap))
        if ok:
            theta, loglik = theta_p, loglik_p
        adapter.update(k, ok)
        states[k - 1] = theta
        accepted[k - 1] = ok

    return ChainTrace(
        states=states, accepted=accepted, evals=evals, n_data=n, seed=seed,
        sampler="mh",
        meta={"setup_evals": n, "final_scale": adapter.scale,
              "proposal_scale0": proposal.scale},
    )
