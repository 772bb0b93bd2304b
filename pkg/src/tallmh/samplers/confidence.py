"""Adaptive-subsampling MH with concentration-bound stopping.

Each acceptance decision is recast as a comparison between the average
per-datum log likelihood ratio and a threshold psi computed from the
acceptance uniform, prior and proposal.  The average is estimated from a
growing subsample; an empirical Bernstein bound certifies the comparison as
soon as the running estimate is far enough from the threshold.  When a
Taylor proxy is supplied, the per-datum ratios are centered at their proxy
predictions first, which shrinks both the variance and the range feeding the
bound and leaves an O(1) aggregate correction on the threshold side.

If the subsample grows to the whole dataset the decision falls back to an
exact full-data comparison, computed with the same arithmetic as the plain
MH sampler so paired runs agree decision for decision.

Per-iteration evaluation counts follow the convention: a decision that
stopped at subsample size T costs 2T, or T when the current state's
per-datum log likelihoods are already known from a previous full pass; full
passes store their values until the chain moves.  When the proxy is rebuilt
mid-run the iteration runs as a normal full-data MH step and reports 2n.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..proxy import build_proxy, proxy_sum, remainder_bound
from .base import (ChainTrace, ScaleAdapter, accept_decision, log_accept_ratio,
                   make_streams, prior_proposal_gap, seq_sum)


def bernstein_bound(sigma_hat: float, range_c: float, t: int,
                    delta_t: float) -> float:
    """Empirical Bernstein deviation bound for a mean of t bounded draws.

    sigma_hat is the (biased) sample standard deviation and range_c the
    width of an interval containing the summands.  A non-positive delta_t
    yields an infinite (never satisfied) bound.
    """
    if delta_t <= 0.0:
        return math.inf
    log_term = math.log(3.0 / delta_t)
    return sigma_hat * math.sqrt(2.0 * log_term / t) + 6.0 * range_c * log_term / t


def geometric_delta_schedule(delta: float) -> Callable[[int], float]:
    """Budget split delta_j = delta / 2^(j+1), summing to delta over looks."""

    def schedule(j: int) -> float:
        return delta / 2.0 ** (j + 1)

    return schedule


@dataclass(frozen=True)
class ConfidenceConfig:
    """Stopping-rule parameters.

    delta is the per-decision error budget; delta = 0 is the degenerate
    exact mode where the bound is unreachable and every decision runs to the
    full dataset.  batch_growth is the geometric subsample growth factor and
    t_init the subsample size at the first test (the per-iteration cost
    floor; larger values also make the variance estimate entering the bound
    less noisy).  with_replacement draws each batch with replacement from
    the not yet used points (which are then retired); the alternative walks
    a fresh permutation.
    """

    delta: float = 0.1
    batch_growth: float = 1.5
    t_init: int = 1
    with_replacement: bool = True
    delta_schedule: Callable[[int], float] | None = None

    def __post_init__(self):
        if not 0.0 <= self.delta < 1.0:
            raise ValueError("delta must lie in [0, 1)")
        if self.batch_growth <= 1.0:
            raise ValueError("batch_growth must exceed 1")
        if self.t_init < 1:
            raise ValueError("t_init must be at least 1")

    def schedule(self) -> Callable[[int], float]:
        if self.delta_schedule is not None:
            return self.delta_schedule
        return geometric_delta_schedule(self.delta)


@dataclass
class StopDecision:
    accepted: bool
    t_used: int
    exhausted: bool


def confidence_decision(model, dataset, config: ConfidenceConfig, theta,
                        theta_p, u: float, pq_gap: float, sub_rng,
                        proxy=None, cur_loglik=None):
    """One acceptance decision from a growing subsample.

    cur_loglik is the per-datum log likelihood at theta when a previous full
    pass stored it, else None.  Returns (StopDecision, next_loglik, evals):
    next_loglik is the stored per-datum vector at the decision's winning
    state (None unless a full pass happened or the rejected state already
    had one), evals the charged count.
    """
    n = dataset.n
    psi = (math.log(u) - pq_gap) / n
    schedule = config.schedule()

    if proxy is not None:
        p_sum = proxy_sum(proxy, theta, theta_p)
        range_c = 2.0 * remainder_bound(proxy, theta, theta_p)
    else:
        p_sum = 0.0
        range_c = None  # exact range, computed lazily on first use

    if config.with_replacement:
        avail = np.arange(n)
    else:
        perm = sub_rng.permutation(n)

    s1 = 0.0
    s2 = 0.0
    t = 0
    look = 0
    b = min(n, config.t_init)
    while True:
        m = b - t
        if config.with_replacement:
            pos = sub_rng.integers(0, avail.shape[0], size=m)
            batch = avail[pos]
            avail = np.delete(avail, np.unique(pos))
        else:
            batch = perm[t:b]
        if proxy is not None:
            r = model.corrected_ratios(dataset, batch, theta, theta_p, proxy)
        else:
            r = model.log_lik_ratios(dataset, batch, theta, theta_p)
        s1 += float(r.sum())
        s2 += float((r * r).sum())
        t = b

        delta_t = schedule(look)
        look += 1
        if delta_t <= 0.0 or not np.isfinite(range_c if range_c is not None else 1.0):
            c = math.inf
        else:
            if range_c is None:
                rr = model.log_lik_ratios(dataset, None, theta, theta_p)
                range_c = float(rr.max() - rr.min())
            lam = s1 / t
            sigma = math.sqrt(max(s2 / t - lam * lam, 0.0))
            c = bernstein_bound(sigma, range_c, t, delta_t)

        stat = (s1 / t + p_sum) - psi
        if abs(stat) >= c:
            accepted = stat > 0.0
            evals = t if cur_loglik is not None else 2 * t
            nxt = None if accepted else cur_loglik
            return StopDecision(accepted, t, False), nxt, evals
        if t >= n:
            break
        b = min(n, math.ceil(config.batch_growth * t))

    # Exhausted: exact full-data decision, same arithmetic as plain MH.
    if cur_loglik is None:
        cur_loglik = model.log_lik(dataset, None, theta)
        evals = 2 * n
    else:
        evals = n
    prop_loglik = model.log_lik(dataset, None, theta_p)
    log_ratio = log_accept_ratio(seq_sum(cur_loglik), seq_sum(prop_loglik), pq_gap)
    accepted = accept_decision(u, log_ratio)
    nxt = prop_loglik if accepted else cur_loglik
    return StopDecision(accepted, n, True), nxt, evals


def confidence_step(model, dataset, config: ConfidenceConfig, proposal, theta,
                    streams, proxy=None, cur_loglik=None):
    """Draw a proposal and decide it; returns (StopDecision, theta_next)."""
    theta = np.asarray(theta, dtype=np.float64)
    theta_p = proposal.propose(theta, proposal.scale, streams.proposal)
    u = streams.uniform.random()
    pq_gap = prior_proposal_gap(model, proposal, theta, theta_p)
    decision, _, _ = confidence_decision(
        model, dataset, config, theta, theta_p, u, pq_gap, streams.subsample,
        proxy=proxy, cur_loglik=cur_loglik)
    return decision, (theta_p if decision.accepted else theta)


def confidence_run(model, dataset, config: ConfidenceConfig, proposal, theta0,
                   n_iter: int, seed: int, *, proxy=None, policy=None,
                   store_dir=None, counter=None) -> ChainTrace:
    """Run the subsampling chain.

    policy None together with proxy None gives the proxy-free sampler (the
    stopping rule then uses the exact per-datum ratio range).  With a policy
    and no proxy, an initial proxy is anchored at theta0.  Under the drop
    policy, every alpha-th iteration runs as a full-data MH step and
    re-anchors the proxy at the resulting state.
    """
    model.validate(dataset)
    streams = make_streams(seed)
    adapter = ScaleAdapter(proposal)
    theta = np.asarray(theta0, dtype=np.float64).copy()
    n = dataset.n

    owned = []
    setup_evals = 0
    if policy is not None and proxy is None:
        proxy = build_proxy(model, dataset, theta, radius=policy.radius,
                            store_dir=store_dir, counter=counter)
        owned.append(proxy)
        setup_evals = proxy.build_cost

    states = np.empty((n_iter, theta.shape[0]))
    accepted = np.empty(n_iter, dtype=bool)
    evals = np.empty(n_iter, dtype=np.int64)
    cur_loglik = None
    rebuilds = 0

    for k in range(1, n_iter + 1):
        theta_p = proposal.propose(theta, adapter.scale, streams.proposal)
        u = streams.uniform.random()
        pq_gap = prior_proposal_gap(model, proposal, theta, theta_p)

        if policy is not None and policy.is_due(k):
            # Rebuild iteration: a normal full-data MH step (reported as 2n
            # regardless of caching), then re-anchor at the new state.
            if cur_loglik is None:
                cur_loglik = model.log_lik(dataset, None, theta)
            prop_loglik = model.log_lik(dataset, None, theta_p)
            log_ratio = log_accept_ratio(seq_sum(cur_loglik),
                                         seq_sum(prop_loglik), pq_gap)
            ok = accept_decision(u, log_ratio)
            if ok:
                theta = theta_p
                cur_loglik = prop_loglik
            used = 2 * n
            old = proxy
            proxy = build_proxy(model, dataset, theta, radius=policy.radius,
                                store_dir=store_dir)
            owned.append(proxy)
            if old in owned:
                old.release()
                owned.remove(old)
            rebuilds += 1
        else:
            decision, nxt, used = confidence_decision(
                model, dataset, config, theta, theta_p, u, pq_gap,
                streams.subsample, proxy=proxy, cur_loglik=cur_loglik)
            ok = decision.accepted
            cur_loglik = nxt
            if ok:
                theta = theta_p
        if counter is not None:
            counter.add(used)
        adapter.update(k, ok)
        states[k - 1] = theta
        accepted[k - 1] = ok
        evals[k - 1] = used

    for pr in owned:
        pr.release()

    return ChainTrace(
        states=states, accepted=accepted, evals=evals, n_data=n, seed=seed,
        sampler="confidence",
        meta={
            "delta": config.delta,
            "batch_growth": config.batch_growth,
            "with_replacement": config.with_replacement,
            "policy": None if policy is None else
                {"mode": policy.mode, "alpha": policy.alpha,
                 "radius": policy.radius},
            "proxy_rebuilds": rebuilds,
            "setup_evals": setup_evals,
            "final_scale": adapter.scale,
            "proposal_scale0": proposal.scale,
        },
    )
