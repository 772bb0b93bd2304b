"""Subsampling Markov chain Monte Carlo for tall datasets.

The package centers on an adaptive-stopping Metropolis-Hastings sampler
that decides accept/reject from a small random subsample of per-datum
log likelihood ratios, with a concentration bound controlling the error
probability.  Control-variate proxies built from a second-order Taylor
expansion shrink the range of the subsampled terms and push the cost per
iteration down to a small fraction of the dataset.  Baseline samplers
(plain MH, auxiliary-variable and pseudo-marginal schemes, a sequential
t-test sampler, stochastic gradient Langevin dynamics, and delayed
acceptance) share the same trace format so everything can be compared on
equal likelihood-evaluation footing.
"""

from ._kernels import backend as kernel_backend
from .data import (
    DataError,
    Dataset,
    generate,
    ingest_csv,
    load_dataset,
    save_dataset,
    subset,
)
from .models import (
    FAMILIES,
    CauchyPrior,
    EvalCounter,
    FlatPrior,
    GammaModel,
    GaussianModel,
    LogisticModel,
    ModelError,
    default_cauchy_prior,
)
from .proxy import (
    ProxyError,
    ProxyPolicy,
    TaylorProxy,
    build_proxy,
    load_proxy,
    refresh_if_due,
)
from .samplers import (
    ChainTrace,
    ConfidenceConfig,
    FireflyBoundError,
    MapResult,
    RandomWalkProposal,
    WeightedTrace,
    austerity_run,
    bernstein_bound,
    confidence_run,
    default_scale,
    delayed_acceptance_run,
    eps0_from_proposal_scale,
    find_map,
    firefly_pm_variance,
    firefly_run,
    load_trace,
    mh_run,
    naive_subsample_demo,
    pm_mh_run,
    rhee_glynn_estimate,
    rhee_glynn_log_estimate,
    save_trace,
    sgld_run,
)
from .diagnostics import (
    BvMReference,
    EvalSummary,
    autocorrelation,
    bvm_reference,
    compare_posteriors,
    eval_summary,
    gelman_rubin,
    wasserstein1,
)

__version__ = "0.1.0"

__all__ = [
    "BvMReference",
    "CauchyPrior",
    "ChainTrace",
    "EvalSummary",
    "ConfidenceConfig",
    "DataError",
    "Dataset",
    "EvalCounter",
    "FAMILIES",
    "FireflyBoundError",
    "FlatPrior",
    "GammaModel",
    "GaussianModel",
    "LogisticModel",
    "MapResult",
    "ModelError",
    "ProxyError",
    "ProxyPolicy",
    "RandomWalkProposal",
    "TaylorProxy",
    "WeightedTrace",
    "austerity_run",
    "autocorrelation",
    "bernstein_bound",
    "build_proxy",
    "bvm_reference",
    "compare_posteriors",
    "confidence_run",
    "default_cauchy_prior",
    "default_scale",
    "delayed_acceptance_run",
    "eps0_from_proposal_scale",
    "eval_summary",
    "find_map",
    "firefly_pm_variance",
    "firefly_run",
    "gelman_rubin",
    "generate",
    "ingest_csv",
    "kernel_backend",
    "load_dataset",
    "load_proxy",
    "load_trace",
    "mh_run",
    "naive_subsample_demo",
    "pm_mh_run",
    "refresh_if_due",
    "rhee_glynn_estimate",
    "rhee_glynn_log_estimate",
    "save_dataset",
    "save_trace",
    "sgld_run",
    "subset",
    "wasserstein1",
]
