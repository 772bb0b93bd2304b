"""Shared sampler plumbing: random streams, proposals, chain traces.

All randomness in a run derives from one integer seed through separate
counter-based streams, one per purpose.  Samplers that share purposes (every
chain draws proposals from the proposal stream and acceptance uniforms from
the uniform stream) therefore see identical draws under a shared seed, which
is what makes paired equivalence checks between samplers possible: extra
draws on one sampler's subsampling stream never desynchronize another
sampler's proposal sequence.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

TRACE_FORMAT_VERSION = 1

# stream purposes
PROPOSAL, UNIFORM, SUBSAMPLE, NOISE, BRIGHTNESS, INIT = range(6)


@dataclass
class RngStreams:
    proposal: np.random.Generator
    uniform: np.random.Generator
    subsample: np.random.Generator
    noise: np.random.Generator
    brightness: np.random.Generator
    init: np.random.Generator


def make_streams(seed: int) -> RngStreams:
    """Independent Philox streams for each randomness purpose."""

    def gen(purpose):
        return np.random.Generator(
            np.random.Philox(np.random.SeedSequence((int(seed), purpose)))
        )

    return RngStreams(
        proposal=gen(PROPOSAL), uniform=gen(UNIFORM), subsample=gen(SUBSAMPLE),
        noise=gen(NOISE), brightness=gen(BRIGHTNESS), init=gen(INIT),
    )


# ---------------------------------------------------------------------------
# proposals
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RandomWalkProposal:
    """Isotropic Gaussian random walk with optional acceptance-rate tuning.

    When target_accept is set, the log step size follows a Robbins-Monro
    recursion toward that acceptance rate during the first adapt_horizon
    iterations and is frozen afterwards.
    """

    scale: float
    target_accept: float | None = 0.5
    adapt_horizon: int = 1000

    def __post_init__(self):
        if self.scale <= 0:
            raise ValueError("proposal scale must be positive")
        if self.target_accept is not None and not 0 < self.target_accept < 1:
            raise ValueError("target acceptance rate must lie in (0, 1)")

    def propose(self, theta, scale, rng):
        return theta + scale * rng.standard_normal(theta.shape[0])

    def log_q_ratio(self, theta, theta_p) -> float:
        """log q(theta | theta_p) - log q(theta_p | theta); zero, symmetric."""
        return 0.0


class ScaleAdapter:
    """Mutable per-run adaptation state for a RandomWalkProposal."""

    def __init__(self, proposal: RandomWalkProposal):
        self.proposal = proposal
        self.log_scale = math.log(proposal.scale)

    @property
    def scale(self) -> float:
        return math.exp(self.log_scale)

    def update(self, iteration: int, accepted: bool) -> None:
        tgt = self.proposal.target_accept
        if tgt is None or iteration > self.proposal.adapt_horizon:
            return
        gain = iteration ** -0.6
        self.log_scale += gain * ((1.0 if accepted else 0.0) - tgt)


def default_scale(n: int, d: int = 1) -> float:
    """Rule-of-thumb initial random walk step size, proportional to 1/sqrt(n)."""
    return 2.4 / math.sqrt(n * max(d, 1))


# ---------------------------------------------------------------------------
# acceptance arithmetic
# ---------------------------------------------------------------------------

def log_accept_ratio(loglik_cur: float, loglik_prop: float,
                     pq_gap: float = 0.0) -> float:
    """(loglik_prop - loglik_cur) + pq_gap; every sampler that needs exact
    pairwise agreement with another must use this same expression."""
    return (loglik_prop - loglik_cur) + pq_gap


def accept_decision(u: float, log_ratio: float) -> bool:
    return math.log(u) < log_ratio


def prior_proposal_gap(model, proposal, theta, theta_p) -> float:
    """The non-likelihood part of the log acceptance ratio."""
    return (model.prior.log_density(theta_p) - model.prior.log_density(theta)
            + proposal.log_q_ratio(theta, theta_p))


def seq_sum(values) -> float:
    """Index-order float64 accumulation (matches the kernels' full sums)."""
    values = np.asarray(values)
    if values.size == 0:
        return 0.0
    return float(np.cumsum(values)[-1])


# ---------------------------------------------------------------------------
# chain traces
# ---------------------------------------------------------------------------

@dataclass
class ChainTrace:
    """States visited, acceptance flags and per-iteration evaluation counts.

    evals[k] is the number of per-datum likelihood evaluations charged to
    iteration k.  For the subsampling samplers it never exceeds 2n; the
    pseudo-marginal chain has unbounded estimator cost and sets
    meta["unbounded_evals"] to opt out of that check.
    """

    states: np.ndarray
    accepted: np.ndarray
    evals: np.ndarray
    n_data: int
    seed: int
    sampler: str
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.states = np.asarray(self.states, dtype=np.float64)
        self.accepted = np.asarray(self.accepted, dtype=bool)
        self.evals = np.asarray(self.evals, dtype=np.int64)
        if self.states.ndim != 2:
            raise ValueError("states must be (iterations, dim)")
        m = self.states.shape[0]
        if self.accepted.shape != (m,) or self.evals.shape != (m,):
            raise ValueError("accepted/evals must match the number of iterations")
        if (self.evals < 0).any():
            raise ValueError("negative evaluation count")
        if not self.meta.get("unbounded_evals"):
            if (self.evals > 2 * self.n_data).any():
                raise ValueError("evaluation count above 2n")

    @property
    def n_iter(self) -> int:
        return self.states.shape[0]

    @property
    def dim(self) -> int:
        return self.states.shape[1]

    def acceptance_rate(self, start: int = 0) -> float:
        return float(self.accepted[start:].mean())

    def eval_fractions(self):
        return self.evals / float(self.n_data)


def save_trace(trace: ChainTrace, dir_path) -> None:
    """Write trace.csv (one row per iteration) and meta.json next to it."""
    dir_path = Path(dir_path)
    dir_path.mkdir(parents=True, exist_ok=True)
    p = trace.dim
    header = "iteration,accepted,evals," + ",".join(
        "theta_%d" % j for j in range(p)
    )
    with open(dir_path / "trace.csv", "w") as fh:
        fh.write(header + "\n")
        for k in range(trace.n_iter):
            row = "%d,%d,%d," % (k + 1, int(trace.accepted[k]), trace.evals[k])
            row += ",".join("%.17g" % v for v in trace.states[k])
            fh.write(row + "\n")
    info = {
        "format_version": TRACE_FORMAT_VERSION,
        "sampler": trace.sampler,
        "seed": trace.seed,
        "n_data": trace.n_data,
        "n_iter": trace.n_iter,
        "dim": p,
        "meta": _jsonable(trace.meta),
    }
    with open(dir_path / "meta.json", "w") as fh:
        json.dump(info, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_trace(dir_path) -> ChainTrace:
    dir_path = Path(dir_path)
    with open(dir_path / "meta.json") as fh:
        info = json.load(fh)
    if info.get("format_version") != TRACE_FORMAT_VERSION:
        raise ValueError("unsupported trace format version %r"
                         % info.get("format_version"))
    raw = np.loadtxt(dir_path / "trace.csv", delimiter=",", skiprows=1, ndmin=2)
    if raw.shape[1] != 3 + info["dim"]:
        raise ValueError("trace.csv has %d columns, expected %d"
                         % (raw.shape[1], 3 + info["dim"]))
    return ChainTrace(
        states=raw[:, 3:],
        accepted=raw[:, 1] != 0,
        evals=raw[:, 2].astype(np.int64),
        n_data=int(info["n_data"]),
        seed=int(info["seed"]),
        sampler=info["sampler"],
        meta=info.get("meta", {}),
    )


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    return obj
