"""Stochastic gradient Langevin dynamics with a decaying step size.

Each iteration takes a Langevin step using a subsampled score estimate:

    theta' = theta + (eps_k / 2) [grad log p(theta) + (n/t) sum grad ell]
             + sqrt(eps_k) eta,   eta ~ N(0, I).

There is no acceptance step; the decreasing step size eps_k = eps0 k^(-1/3)
controls the discretization bias, and posterior expectations are estimated
under weights proportional to eps_k.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .base import TRACE_FORMAT_VERSION, _jsonable, make_streams


@dataclass
class WeightedTrace:
    """States with importance weights (here the step sizes)."""

    states: np.ndarray
    weights: np.ndarray
    seed: int
    sampler: str = "sgld"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.states = np.asarray(self.states, dtype=np.float64)
        self.weights = np.asarray(self.weights, dtype=np.float64)
        if self.states.shape[0] != self.weights.shape[0]:
            raise ValueError("states and weights must have equal length")
        if (self.weights <= 0).any():
            raise ValueError("weights must be positive")

    @property
    def n_iter(self) -> int:
        return self.states.shape[0]

    def weighted_mean(self):
        w = self.weights / self.weights.sum()
        return w @ self.states


def eps0_from_proposal_scale(scale: float) -> float:
    """Step size whose injected noise matches a random walk of that scale."""
    return scale * scale


def sgld_run(model, dataset, t_sub: int, theta0, n_iter: int, seed: int,
             eps0: float, exponent: float = 1.0 / 3.0,
             counter=None) -> WeightedTrace:
    """Run SGLD with minibatches of size t_sub drawn without replacement."""
    if not 1 <= t_sub <= dataset.n:
        raise ValueError("t_sub must lie in [1, n]")
    if eps0 <= 0:
        raise ValueError("eps0 must be positive")
    model.validate(dataset)
    streams = make_streams(seed)
    theta = np.asarray(theta0, dtype=np.float64).copy()
    n = dataset.n
    scale_up = n / t_sub

    states = np.empty((n_iter, theta.shape[0]))
    weights = np.empty(n_iter)

    for k in range(1, n_iter + 1):
        eps_k = eps0 * k ** (-exponent)
        idx = streams.subsample.permutation(n)[:t_sub]
        grad = model.prior.grad(theta) + scale_up * model.grad_sum(dataset, idx, theta)
        eta = streams.noise.standard_normal(theta.shape[0])
        theta = theta + 0.5 * eps_k * grad + np.sqrt(eps_k) * eta
        if counter is not None:
            counter.add(t_sub)
        states[k - 1] = theta
        weights[k - 1] = eps_k

    return WeightedTrace(
        states=states, weights=weights, seed=seed,
        meta={"t_sub": t_sub, "eps0": eps0, "exponent": exponent,
              "evals_per_iter": t_sub},
    )


def save_weighted_trace(trace: WeightedTrace, dir_path) -> None:
    """Write weighted_trace.csv and meta.json, floats at full precision."""
    dir_path = Path(dir_path)
    dir_path.mkdir(parents=True, exist_ok=True)
    p = trace.states.shape[1]
    header = "iteration,weight," + ",".join("theta_%d" % j for j in range(p))
    with open(dir_path / "weighted_trace.csv", "w") as fh:
        fh.write(header + "\n")
        for k in range(trace.n_iter):
            row = ["%d" % k, "%.17g" % trace.weights[k]]
            row += ["%.17g" % v for v in trace.states[k]]
            fh.write(",".join(row) + "\n")
    meta = {
        "format_version": TRACE_FORMAT_VERSION,
        "seed": trace.seed,
        "sampler": trace.sampler,
        "meta": _jsonable(trace.meta),
    }
    with open(dir_path / "meta.json", "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)


def load_weighted_trace(dir_path) -> WeightedTrace:
    dir_path = Path(dir_path)
    with open(dir_path / "meta.json") as fh:
        meta = json.load(fh)
    if meta.get("format_version") != TRACE_FORMAT_VERSION:
        raise ValueError("unsupported trace format version")
    raw = np.loadtxt(dir_path / "weighted_trace.csv", delimiter=",", skiprows=1,
                     ndmin=2)
    return WeightedTrace(
        states=raw[:, 2:], weights=raw[:, 1], seed=meta["seed"],
        sampler=meta["sampler"], meta=meta["meta"],
    )
