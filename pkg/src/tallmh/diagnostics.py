"""Convergence and cost diagnostics for chain traces.

Covers marginal autocorrelation, the Gelman-Rubin potential scale
reduction factor, a Gaussian large-n reference posterior (mode plus
inverse observed information), likelihood-evaluation summaries, and
one-dimensional posterior comparison metrics.  Everything here is a pure
function over immutable inputs.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .samplers.map_estimate import find_map


def autocorrelation(series, max_lag: int):
    """Sample autocorrelation at lags 0..max_lag.

    Uses the biased autocovariance estimator (normalizing every lag by the
    series length) so the estimated sequence is positive semi-definite,
    then divides by the lag-0 value.  A constant series has no variance to
    normalize by; it returns all zeros and emits a warning.
    """
    x = np.asarray(series, dtype=np.float64).ravel()
    if x.size < 2:
        raise ValueError("need at least two observations")
    if not 0 <= max_lag < x.size:
        raise ValueError("max_lag must be in [0, len(series))")
    x = x - x.mean()
    var = float(np.dot(x, x)) / x.size
    if var == 0.0:
        warnings.warn("constant series: autocorrelation undefined, returning zeros")
        return np.zeros(max_lag + 1)
    # FFT autocovariance with zero padding to avoid circular wrap-around.
    nfft = int(2 ** np.ceil(np.log2(2 * x.size)))
    f = np.fft.rfft(x, nfft)
    acov = np.fft.irfft(f * np.conj(f), nfft)[: max_lag + 1] / x.size
    return acov / acov[0]


def gelman_rubin(traces) -> float:
    """Potential scale reduction factor across chains.

    Takes the second half of each chain (treating the first half as
    burn-in), splits each retained half in two, and compares between- and
    within-chain variance over the resulting sub-chains:

        R_hat = sqrt(((L - 1)/L * W + B/L) / W)

    Shifted copies of one chain give W = 0 with B > 0, reported as inf.
    """
    arrs = [np.asarray(t, dtype=np.float64).ravel() for t in traces]
    if len(arrs) < 2:
        raise ValueError("need at least two chains")
    length = min(a.size for a in arrs)
    if length < 8:
        raise ValueError("chains too short for a split-half estimate")
    halves = []
    for a in arrs:
        tail = a[a.size // 2:]
        mid = tail.size // 2
        halves.append(tail[:mid])
        halves.append(tail[mid:mid + mid])
    sub_len = min(h.size for h in halves)
    subs = np.stack([h[:sub_len] for h in halves])
    m, length = subs.shape
    means = subs.mean(axis=1)
    within = float(subs.var(axis=1, ddof=1).mean())
    between = length * float(means.var(ddof=1))
    if within == 0.0:
        return 1.0 if between == 0.0 else float("inf")
    v_hat = (length - 1) / length * within + between / length
    return float(np.sqrt(v_hat / within))


@dataclass(frozen=True)
class BvMReference:
    """Gaussian reference posterior: mode and inverse observed information."""

    center: np.ndarray
    covariance: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, dtype=np.float64))
        object.__setattr__(self, "covariance",
                           np.asarray(self.covariance, dtype=np.float64))
        cov = self.covariance
        if not np.allclose(cov, cov.T):
            raise ValueError("covariance must be symmetric")
        if (np.linalg.eigvalsh(cov) <= 0).any():
            raise ValueError("covariance must be positive definite")


def bvm_reference(model, dataset) -> BvMReference:
    """Large-n Gaussian approximation of the posterior.

    Center is the posterior mode; covariance is the inverse of the
    observed information (negative Hessian of the log posterior) there.
    """
    res = find_map(model, dataset)
    info = -(model.full_hess(dataset, res.theta)
             + model.prior.hess(res.theta))
    info = 0.5 * (info + info.T)
    cov = np.linalg.inv(info)
    return BvMReference(center=res.theta, covariance=0.5 * (cov + cov.T))


def _as_samples(trace):
    """Extract (states, weights) from a trace-like object or array."""
    states = getattr(trace, "states", trace)
    states = np.asarray(states, dtype=np.float64)
    if states.ndim == 1:
        states = states[:, None]
    weights = getattr(trace, "weights", None)
    if weights is None:
        weights = np.ones(states.shape[0])
    return states, np.asarray(weights, dtype=np.float64)


def wasserstein1(xa, xb, weights_a=None, weights_b=None) -> float:
    """1-Wasserstein distance between two weighted 1-d empirical measures.

    Computed exactly from the quantile coupling: sort both samples, merge
    the cumulative-weight breakpoints, and integrate the gap between the
    two quantile functions over (0, 1].
    """
    def prep(x, w):
        x = np.asarray(x, dtype=np.float64).ravel()
        w = np.ones(x.size) if w is None else np.asarray(w, dtype=np.float64).ravel()
        if w.size != x.size:
            raise ValueError("weights must match the sample length")
        if (w < 0).any() or w.sum() <= 0:
            raise ValueError("weights must be nonnegative with positive total")
        order = np.argsort(x, kind="stable")
        cum = np.cumsum(w[order])
        cum /= cum[-1]
        cum[-1] = 1.0
        return x[order], cum

    xa, ca = prep(xa, weights_a)
    xb, cb = prep(xb, weights_b)
    q = np.unique(np.concatenate([ca, cb]))
    widths = np.diff(np.concatenate([[0.0], q]))
    va = xa[np.searchsorted(ca, q, side="left")]
    vb = xb[np.searchsorted(cb, q, side="left")]
    return float(np.sum(widths * np.abs(va - vb)))


def compare_posteriors(trace_a, trace_b) -> dict:
    """Per-coordinate location/scale gaps and marginal Wasserstein distances.

    Accepts chain traces, weighted traces or raw (iterations, dim) arrays.
    Returns mean_diff, std_diff and wasserstein1 arrays of length dim,
    where diffs are a minus b.
    """
    sa, wa = _as_samples(trace_a)
    sb, wb = _as_samples(trace_b)
    if sa.shape[1] != sb.shape[1]:
        raise ValueError("traces have different dimensions")
    pa = wa / wa.sum()
    pb = wb / wb.sum()
    mean_a = pa @ sa
    mean_b = pb @ sb
    var_a = pa @ (sa - mean_a) ** 2
    var_b = pb @ (sb - mean_b) ** 2
    w1 = np.array([
        wasserstein1(sa[:, j], sb[:, j], wa, wb) for j in range(sa.shape[1])
    ])
    return {
        "mean_diff": mean_a - mean_b,
        "std_diff": np.sqrt(var_a) - np.sqrt(var_b),
        "wasserstein1": w1,
    }


@dataclass(frozen=True)
class EvalSummary:
    """Distribution of per-iteration cost as a fraction of the dataset."""

    mean_fraction: float
    median_fraction: float
    quantiles: list

    def __post_init__(self):
        vals = [self.mean_fraction, self.median_fraction]
        vals += [v for _, v in self.quantiles]
        if any(not 0.0 <= v <= 2.0 for v in vals):
            raise ValueError("evaluation fractions must lie in [0, 2]")


def eval_summary(trace, qs=(0.1, 0.25, 0.75, 0.9)) -> EvalSummary:
    """Summarize L_k/n over a chain trace."""
    frac = np.asarray(trace.eval_fractions(), dtype=np.float64)
    return EvalSummary(
        mean_fraction=float(frac.mean()),
        median_fraction=float(np.median(frac)),
        quantiles=[(float(q), float(np.quantile(frac, q))) for q in qs],
    )


# ---------------------------------------------------------------------------
# plot-ready CSV output
# ---------------------------------------------------------------------------

def write_autocorrelation_csv(path, named_series, max_lag: int) -> None:
    """One row per lag, one column per named series."""
    names = list(named_series)
    cols = {k: autocorrelation(v, max_lag) for k, v in named_series.items()}
    with open(Path(path), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["lag"] + names)
        for lag in range(max_lag + 1):
            w.writerow([lag] + ["%.17g" % cols[k][lag] for k in names])


def write_fraction_histogram_csv(path, trace, bins: int = 40) -> None:
    """Histogram of per-iteration evaluation fractions."""
    frac = np.asarray(trace.eval_fractions(), dtype=np.float64)
    counts, edges = np.histogram(frac, bins=bins, range=(0.0, 2.0))
    with open(Path(path), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["bin_left", "bin_right", "count"])
        for j in range(counts.size):
            w.writerow(["%.17g" % edges[j], "%.17g" % edges[j + 1], counts[j]])


def write_marginal_histogram_csv(path, trace, coord: int = 0,
                                 bins: int = 60) -> None:
    """Weighted histogram of one coordinate of a trace."""
    states, weights = _as_samples(trace)
    counts, edges = np.histogram(states[:, coord], bins=bins, weights=weights)
    with open(Path(path), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["bin_left", "bin_right", "mass"])
        for j in range(counts.size):
            w.writerow(["%.17g" % edges[j], "%.17g" % edges[j + 1],
                        "%.17g" % counts[j]])
