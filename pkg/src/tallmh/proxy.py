"""Second-order Taylor proxies for per-datum log likelihood ratios.

A proxy is anchored at a reference point theta_star.  It stores, per datum,
the log likelihood and enough derivative information at theta_star to predict
log likelihood differences cheaply, plus dataset-level aggregates that make
the average prediction an O(1) computation.  A uniform third-derivative
bound over a trust region turns the prediction error into a hard interval.

The per-datum table is persisted as a little-endian binary file: an 8-byte
magic, fixed-size header, float64 metadata block (theta_star, aggregates,
bound constants), then n fixed-width float64 records.  Readers memory-map
the file and validate the header before use.
"""

from __future__ import annotations

import os
import struct
import tempfile
from dataclasses import dataclass

import numpy as np

MAGIC = b"TMHPROX1"
STORE_VERSION = 1
_HEADER = struct.Struct("<IIQII")  # version, family code, n, p, record width

_FAMILY_CODES = {"gaussian": 1, "logistic": 2, "gamma": 3}
_CODE_FAMILIES = {v: k for k, v in _FAMILY_CODES.items()}
_RECORD_WIDTH = {"gaussian": 6, "logistic": 3, "gamma": 3}


class ProxyError(ValueError):
    """Raised for invalid proxy stores or misuse of a proxy."""


@dataclass
class TaylorProxy:
    """Frozen snapshot of per-datum Taylor data at one anchor point.

    ell, g, h are in-memory views of the record columns: for the regression
    families g and h are scalar coefficient vectors (gradient = g_i x_i,
    Hessian = h_i x_i x_i^T); for the gaussian family g is (n, 2) and h the
    packed symmetric (n, 3) Hessian.
    """

    family: str
    theta_star: np.ndarray
    mu_hat: np.ndarray
    s_hat: np.ndarray
    mean_ell: float
    m3: float
    radius: float
    norm_kind: str
    n: int
    ell: np.ndarray
    g: np.ndarray
    h: np.ndarray
    store_path: str
    build_cost: int

    def release(self) -> None:
        """Delete the backing store file (the in-memory arrays survive)."""
        if self.store_path and os.path.exists(self.store_path):
            os.unlink(self.store_path)

    def displacement_norm(self, v) -> float:
        if self.norm_kind == "l2":
            return float(np.sqrt(np.dot(v, v)))
        return float(np.abs(np.asarray(v)).sum())


def _split_records(family, rec):
    if family == "gaussian":
        return (np.ascontiguousarray(rec[:, 0]),
                np.ascontiguousarray(rec[:, 1:3]),
                np.ascontiguousarray(rec[:, 3:6]))
    return (np.ascontiguousarray(rec[:, 0]),
            np.ascontiguousarray(rec[:, 1]),
            np.ascontiguousarray(rec[:, 2]))


def _write_store(path, family, theta_star, mu_hat, s_hat, mean_ell, m3, radius, rec):
    n, width = rec.shape
    p = theta_star.shape[0]
    meta = np.concatenate([
        theta_star, mu_hat, s_hat.ravel(),
        np.array([mean_ell, m3, radius]),
    ])
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(_HEADER.pack(STORE_VERSION, _FAMILY_CODES[family], n, p, width))
        fh.write(np.ascontiguousarray(meta).tobytes())
        fh.write(np.ascontiguousarray(rec).tobytes())


def build_proxy(model, dataset, theta_star, *, radius: float = 1.0,
                store_dir=None, counter=None) -> TaylorProxy:
    """Build a proxy anchored at theta_star and persist its per-datum store.

    Charges n likelihood evaluations to the counter (derivative work at the
    anchor is not billed separately).
    """
    theta_star = np.ascontiguousarray(theta_star, dtype=np.float64)
    rec, mu_hat, s_hat, mean_ell = model.taylor_records(dataset, theta_star)
    m3 = model.third_deriv_bound(dataset, theta_star, radius)
    eff_radius = np.inf if model.bound_is_global else float(radius)
    fd, path = tempfile.mkstemp(suffix=".proxy", prefix="tallmh_",
                                dir=store_dir)
    os.close(fd)
    _write_store(path, model.family, theta_star, mu_hat, s_hat, mean_ell,
                 m3, eff_radius, rec)
    if counter is not None:
        counter.add(dataset.n)
    ell, g, h = _split_records(model.family, rec)
    return TaylorProxy(
        family=model.family, theta_star=theta_star, mu_hat=mu_hat, s_hat=s_hat,
        mean_ell=mean_ell, m3=m3, radius=eff_radius, norm_kind=model.norm_kind,
        n=dataset.n, ell=ell, g=g, h=h, store_path=path, build_cost=dataset.n,
    )


def load_proxy(path, dataset=None, model=None) -> TaylorProxy:
    """Open a proxy store, validating magic, version and shape information."""
    size = os.path.getsize(path)
    if size < len(MAGIC) + _HEADER.size:
        raise ProxyError("%s: too short to be a proxy store" % path)
    with open(path, "rb") as fh:
        magic = fh.read(len(MAGIC))
        if magic != MAGIC:
            raise ProxyError("%s: bad magic %r" % (path, magic))
        version, code, n, p, width = _HEADER.unpack(fh.read(_HEADER.size))
    if version != STORE_VERSION:
        raise ProxyError("%s: unsupported store version %d" % (path, version))
    if code not in _CODE_FAMILIES:
        raise ProxyError("%s: unknown family code %d" % (path, code))
    family = _CODE_FAMILIES[code]
    if width != _RECORD_WIDTH[family]:
        raise ProxyError("%s: record width %d does not match family %s"
                         % (path, width, family))
    if dataset is not None and dataset.n != n:
        raise ProxyError("%s: store has n=%d but dataset has n=%d"
                         % (path, n, dataset.n))
    if model is not None and model.family != family:
        raise ProxyError("%s: store family %s does not match model %s"
                         % (path, family, model.family))
    meta_len = 2 * p + p * p + 3
    offset = len(MAGIC) + _HEADER.size
    expected = offset + (meta_len + n * width) * 8
    if size != expected:
        raise ProxyError("%s: holds %d bytes, expected %d" % (path, size, expected))
    meta = np.fromfile(path, dtype=np.float64, count=meta_len, offset=offset)
    theta_star = meta[:p]
    mu_hat = meta[p:2 * p]
    s_hat = meta[2 * p:2 * p + p * p].reshape(p, p)
    mean_ell, m3, radius = meta[meta_len - 3:]
    rec = np.memmap(path, dtype=np.float64, mode="r",
                    offset=offset + meta_len * 8, shape=(n, width))
    ell, g, h = _split_records(family, rec)
    del rec
    return TaylorProxy(
        family=family, theta_star=theta_star.copy(), mu_hat=mu_hat.copy(),
        s_hat=s_hat.copy(), mean_ell=float(mean_ell), m3=float(m3),
        radius=float(radius), norm_kind="l2" if family == "logistic" else "l1",
        n=n, ell=ell, g=g, h=h, store_path=str(path), build_cost=0,
    )


# ---------------------------------------------------------------------------
# proxy arithmetic
# ---------------------------------------------------------------------------

def proxy_sum(proxy: TaylorProxy, theta, theta_p) -> float:
    """Average predicted log ratio, (1/n) sum_i proxy_i(theta, theta_p).

    O(1) via the stored aggregates; charges no likelihood evaluations.
    """
    theta = np.asarray(theta, dtype=np.float64)
    theta_p = np.asarray(theta_p, dtype=np.float64)
    step = theta_p - theta
    mid = theta + theta_p - 2.0 * proxy.theta_star
    return float(proxy.mu_hat @ step + 0.5 * step @ (proxy.s_hat @ mid))


def proxy_pairs(model, dataset, proxy: TaylorProxy, idx, theta, theta_p):
    """Per-datum predicted log ratios for the rows in idx."""
    return (model.taylor_values(dataset, idx, theta_p, proxy)
            - model.taylor_values(dataset, idx, theta, proxy))


def proxy_pair_i(model, dataset, proxy: TaylorProxy, i, theta, theta_p) -> float:
    return float(proxy_pairs(model, dataset, proxy, np.array([i]), theta, theta_p)[0])


def remainder_bound(proxy: TaylorProxy, theta, theta_p) -> float:
    """Uniform bound on |true log ratio - predicted| over the data.

    (m3/6) (|theta - star|^3 + |theta_p - star|^3) in the family's
    displacement norm.  Identical endpoints give exactly 0.  Outside the
    trust region the bound is unavailable and +inf is returned, which makes
    any certification test fail and forces exact fallbacks.
    """
    theta = np.asarray(theta, dtype=np.float64)
    theta_p = np.asarray(theta_p, dtype=np.float64)
    if np.array_equal(theta, theta_p):
        return 0.0
    d0 = theta - proxy.theta_star
    d1 = theta_p - proxy.theta_star
    if np.isfinite(proxy.radius):
        if (np.abs(d0).max() > proxy.radius or np.abs(d1).max() > proxy.radius):
            return np.inf
    n0 = proxy.displacement_norm(d0)
    n1 = proxy.displacement_norm(d1)
    return (proxy.m3 / 6.0) * (n0**3 + n1**3)


# ---------------------------------------------------------------------------
# refresh policy
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ProxyPolicy:
    """When to rebuild the proxy during a run.

    mode "single": keep the initial anchor for the whole run.
    mode "drop": re-anchor at the current state every alpha iterations.
    """

    mode: str = "single"
    alpha: int | None = None
    radius: float = 1.0

    def __post_init__(self):
        if self.mode not in ("single", "drop"):
            raise ProxyError("unknown proxy policy mode %r" % self.mode)
        if self.mode == "drop":
            if self.alpha is None or self.alpha < 1:
                raise ProxyError("drop policy needs alpha >= 1")
        if self.radius <= 0:
            raise ProxyError("radius must be positive")

    def is_due(self, iteration: int) -> bool:
        return self.mode == "drop" and iteration % self.alpha == 0


def refresh_if_due(policy: ProxyPolicy, proxy: TaylorProxy, iteration: int,
                   current_theta, model, dataset, *, store_dir=None,
                   counter=None) -> TaylorProxy:
    """Rebuild the proxy at the current state when the policy says so.

    Returns the existing proxy unchanged otherwise.  The rebuild charges
    its n evaluations to the counter.
    """
    if not policy.is_due(iteration):
        return proxy
    return build_proxy(model, dataset, current_theta, radius=policy.radius,
                       store_dir=store_dir, counter=counter)
