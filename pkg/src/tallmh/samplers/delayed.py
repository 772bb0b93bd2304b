"""Delayed acceptance MH: factor the ratio over data batches, exit early.

The acceptance ratio is split across fixed contiguous batches; each factor
gets the prior and proposal contribution raised to 1/B.  A fresh uniform is
drawn per stage and the proposal dies on the first failing stage, so cheap
rejections touch only a prefix of the data.  Accepted proposals always cost
a full pass.  With one batch the sampler is exactly plain MH.

Per-datum log likelihood sums of the current state are kept per batch from
the pass that accepted it, so only proposed-state evaluations are charged.
"""

from __future__ import annotations

import numpy as np

from .base import (ChainTrace, ScaleAdapter, accept_decision, log_accept_ratio,
                   make_streams, prior_proposal_gap, seq_sum)


def delayed_acceptance_run(model, dataset, proposal, theta0, n_iter: int,
                           seed: int, n_batches: int,
                           counter=None) -> ChainTrace:
    if not 1 <= n_batches <= dataset.n:
        raise ValueError("n_batches must lie in [1, n]")
    model.validate(dataset)
    streams = make_streams(seed)
    adapter = ScaleAdapter(proposal)
    theta = np.asarray(theta0, dtype=np.float64).copy()
    n = dataset.n
    batches = np.array_split(np.arange(n, dtype=np.int64), n_batches)
    sizes = np.array([b.shape[0] for b in batches], dtype=np.int64)

    cur_sums = np.array([
        seq_sum(model.log_lik(dataset, b, theta)) for b in batches
    ])
    if counter is not None:
        counter.add(n)

    states = np.empty((n_iter, theta.shape[0]))
    accepted = np.empty(n_iter, dtype=bool)
    evals = np.empty(n_iter, dtype=np.int64)

    for k in range(1, n_iter + 1):
        theta_p = proposal.propose(theta, adapter.scale, streams.proposal)
        stage_gap = prior_proposal_gap(model, proposal, theta, theta_p) / n_batches
        prop_sums = np.empty(n_batches)
        used = 0
        ok = True
        for j, batch in enumerate(batches):
            u = streams.uniform.random()
            prop_sums[j] = seq_sum(model.log_lik(dataset, batch, theta_p))
            used += sizes[j]
            if not accept_decision(
                    u, log_accept_ratio(cur_sums[j], prop_sums[j], stage_gap)):
                ok = False
                break
        if ok:
            theta = theta_p
            cur_sums = prop_sums
        if counter is not None:
            counter.add(used)
        adapter.update(k, ok)
        states[k - 1] = theta
        accepted[k - 1] = ok
        evals[k - 1] = used

    return ChainTrace(
        states=states, accepted=accepted, evals=evals, n_data=n, seed=seed,
        sampler="delayed",
        meta={"n_batches": n_batches, "setup_evals": n,
              "final_scale": adapter.scale, "proposal_scale0": proposal.scale},
    )
