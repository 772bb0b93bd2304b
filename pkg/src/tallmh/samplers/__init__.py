"""Samplers for tall-data posterior inference.

Every chain runner returns a ChainTrace with per-iteration likelihood
evaluation counts, so schemes with very different inner loops can be
compared on the common "fraction of the dataset touched" axis.
"""

from .base import (
    ChainTrace,
    RandomWalkProposal,
    RngStreams,
    accept_decision,
    default_scale,
    load_trace,
    log_accept_ratio,
    make_streams,
    prior_proposal_gap,
    save_trace,
)
from .map_estimate import MapResult, find_map
from .mh import mh_run
from .confidence import (
    ConfidenceConfig,
    StopDecision,
    bernstein_bound,
    confidence_decision,
    confidence_run,
    confidence_step,
    geometric_delta_schedule,
)
from .austerity import austerity_decision, austerity_run
from .firefly import FireflyBoundError, firefly_run
from .pseudo_marginal import (
    firefly_pm_variance,
    gaussian_loglik_floor,
    pm_mh_run,
    rhee_glynn_estimate,
    rhee_glynn_log_estimate,
    rhee_glynn_variance_lower_bound,
)
from .sgld import (
    WeightedTrace,
    eps0_from_proposal_scale,
    load_weighted_trace,
    save_weighted_trace,
    sgld_run,
)
from .delayed import delayed_acceptance_run
from .naive import naive_subsample_demo

__all__ = [
    "ChainTrace",
    "ConfidenceConfig",
    "FireflyBoundError",
    "MapResult",
    "RandomWalkProposal",
    "RngStreams",
    "StopDecision",
    "WeightedTrace",
    "accept_decision",
    "austerity_decision",
    "austerity_run",
    "bernstein_bound",
    "confidence_decision",
    "confidence_run",
    "confidence_step",
    "default_scale",
    "delayed_acceptance_run",
    "eps0_from_proposal_scale",
    "find_map",
    "firefly_pm_variance",
    "firefly_run",
    "gaussian_loglik_floor",
    "geometric_delta_schedule",
    "load_trace",
    "load_weighted_trace",
    "log_accept_ratio",
    "make_streams",
    "mh_run",
    "naive_subsample_demo",
    "pm_mh_run",
    "prior_proposal_gap",
    "rhee_glynn_estimate",
    "rhee_glynn_log_estimate",
    "rhee_glynn_variance_lower_bound",
    "save_trace",
    "save_weighted_trace",
    "sgld_run",
]
