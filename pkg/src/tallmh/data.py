"""Datasets: synthetic generation, CSV ingestion and on-disk storage.

A :class:`Dataset` is a dense float64 design matrix ``X`` of shape (n, d),
an optional response vector ``y`` of length n, and a metadata dict that
records where the data came from (generator kind and seed, or source file),
column roles and any standardization applied.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

FORMAT_VERSION = 1


class DataError(ValueError):
    """Raised for malformed input data or a corrupt on-disk store."""


@dataclass
class Dataset:
    X: np.ndarray
    y: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.X = np.ascontiguousarray(self.X, dtype=np.float64)
        if self.X.ndim != 2 or self.X.shape[0] == 0:
            raise DataError("X must be a non-empty 2-d array")
        if not np.isfinite(self.X).all():
            raise DataError("X contains non-finite values")
        if self.y is not None:
            self.y = np.ascontiguousarray(self.y, dtype=np.float64)
            if self.y.shape != (self.X.shape[0],):
                raise DataError("y length does not match X")
            if not np.isfinite(self.y).all():
                raise DataError("y contains non-finite values")

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]

    def subset(self, idx) -> "Dataset":
        """Row subset as a new Dataset; records the selection in meta."""
        idx = np.asarray(idx)
        meta = dict(self.meta)
        meta["subset_of_n"] = self.n
        return Dataset(
            X=self.X[idx].copy(),
            y=None if self.y is None else self.y[idx].copy(),
            meta=meta,
        )

    def content_hash(self) -> str:
        h = hashlib.sha256()
        h.update(self.X.tobytes())
        if self.y is not None:
            h.update(self.y.tobytes())
        return h.hexdigest()


def subset(dataset: Dataset, n_sub: int, seed: int) -> Dataset:
    """Uniform without-replacement subset of ``n_sub`` rows.

    Deterministic given ``seed``.  ``n_sub == dataset.n`` yields a
    permutation of the original rows.
    """
    if not 1 <= n_sub <= dataset.n:
        raise DataError(f"n_sub must be in [1, {dataset.n}], got {n_sub}")
    idx = _rng(seed).permutation(dataset.n)[:n_sub]
    out = dataset.subset(idx)
    out.meta["subset_seed"] = seed
    return out


# ---------------------------------------------------------------------------
# synthetic data
# ---------------------------------------------------------------------------

def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


def generate(kind: str, n: int, seed: int, **params) -> Dataset:
    """Generate a synthetic dataset.

    Kinds
    -----
    gaussian_1d
        x_i ~ N(loc, scale^2); X is (n, 1), no response.
    lognormal_1d
        x_i = exp(z_i), z_i ~ N(loc, scale^2).
    logistic_two_gaussians
        Balanced +-1 labels; features drawn from two Gaussian clusters with
        means +-separation/2 along every axis (d features, plus an intercept
        column if requested).
    gamma_from_covariates
        Standard normal covariates (first column constant one); response
        y_i ~ Gamma(kappa, exp(x_i . theta_true) / kappa); theta_true is
        stored in meta.
    """
    if n <= 0:
        raise DataError("n must be positive")
    rng = _rng(seed)
    meta = {"kind": kind, "seed": seed, "params": dict(params)}

    if kind == "gaussian_1d":
        loc = params.pop("loc", 0.0)
        scale = params.pop("scale", 1.0)
        _reject_extra(params)
        X = (loc + scale * rng.standard_normal(n)).reshape(n, 1)
        meta["column_roles"] = ["value"]
        return Dataset(X=X, meta=meta)

    if kind == "lognormal_1d":
        loc = params.pop("loc", 0.0)
        scale = params.pop("scale", 1.0)
        _reject_extra(params)
        X = np.exp(loc + scale * rng.standard_normal(n)).reshape(n, 1)
        meta["column_roles"] = ["value"]
        return Dataset(X=X, meta=meta)

    if kind == "logistic_two_gaussians":
        d = int(params.pop("d", 2))
        separation = params.pop("separation", 2.0)
        scale = params.pop("scale", 1.0)
        intercept = params.pop("intercept", False)
        _reject_extra(params)
        if d < 1:
            raise DataError("d must be >= 1")
        labels = np.where(rng.random(n) < 0.5, -1.0, 1.0)
        centers = labels[:, None] * (separation / 2.0) / math.sqrt(d)
        X = centers + scale * rng.standard_normal((n, d))
        roles = ["feature"] * d
        if intercept:
            X = np.hstack([X, np.ones((n, 1))])
            roles.append("intercept")
        meta["column_roles"] = roles
        return Dataset(X=X, y=labels, meta=meta)

    if kind == "gamma_from_covariates":
        d = int(params.pop("d", 5))
        kappa = float(params.pop("kappa", 2.0))
        theta_scale = params.pop("theta_scale", 0.3)
        _reject_extra(params)
        if d < 1:
            raise DataError("d must be >= 1")
        if kappa <= 0:
            raise DataError("kappa must be positive")
        X = rng.standard_normal((n, d))
        X[:, 0] = 1.0
        theta_true = theta_scale * rng.standard_normal(d)
        y = rng.gamma(shape=kappa, scale=np.exp(X @ theta_true) / kappa)
        y = np.maximum(y, np.finfo(np.float64).tiny)
        meta["column_roles"] = ["intercept"] + ["feature"] * (d - 1)
        meta["theta_true"] = theta_true.tolist()
        meta["kappa"] = kappa
        return Dataset(X=X, y=y, meta=meta)

    raise DataError("unknown synthetic kind: %r" % kind)


def _reject_extra(params):
    if params:
        raise DataError("unknown generator parameters: %s" % sorted(params))


# ---------------------------------------------------------------------------
# CSV ingestion
# ---------------------------------------------------------------------------

def ingest_csv(path, *, feature_cols=None, label_col=None, response_col=None,
               standardize=False, add_intercept=False, header=True) -> Dataset:
    """Read a CSV file into a Dataset.

    Columns are referenced by name when the file has a header row, otherwise
    by 0-based index.  ``label_col`` marks a binary classification column
    (its two distinct values are mapped to -1/+1; the mapping is recorded in
    meta); ``response_col`` marks a real-valued response.  Standardization
    is per feature column, (x - mean) / sd, and never touches the intercept.
    Parse failures report the 1-based line number and the column.
    """
    if label_col is not None and response_col is not None:
        raise DataError("label_col and response_col are mutually exclusive")
    path = Path(path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        rows = list(reader)
    if not rows:
        raise DataError("%s: empty file" % path)

    if header:
        names = [c.strip() for c in rows[0]]
        body = rows[1:]
        first_line = 2
    else:
        names = [str(j) for j in range(len(rows[0]))]
        body = rows
        first_line = 1
    if not body:
        raise DataError("%s: no data rows" % path)

    def col_index(col):
        if isinstance(col, int):
            if not 0 <= col < len(names):
                raise DataError("column index %d out of range" % col)
            return col
        if col in names:
            return names.index(col)
        raise DataError("no column named %r (have %s)" % (col, names))

    if feature_cols is None:
        excluded = set()
        if label_col is not None:
            excluded.add(col_index(label_col))
        if response_col is not None:
            excluded.add(col_index(response_col))
        feat_idx = [j for j in range(len(names)) if j not in excluded]
    else:
        feat_idx = [col_index(c) for c in feature_cols]
    if not feat_idx:
        raise DataError("no feature columns selected")

    y_idx = None
    if label_col is not None:
        y_idx = col_index(label_col)
    elif response_col is not None:
        y_idx = col_index(response_col)

    want = feat_idx + ([y_idx] if y_idx is not None else [])
    n = len(body)
    parsed = np.empty((n, len(want)), dtype=np.float64)
    for r, row in enumerate(body):
        for k, j in enumerate(want):
            if j >= len(row):
                raise DataError(
                    "%s line %d: missing column %r" % (path, first_line + r, names[j])
                )
            try:
                parsed[r, k] = float(row[j])
            except ValueError:
                raise DataError(
                    "%s line %d: non-numeric value %r in column %r"
                    % (path, first_line + r, row[j], names[j])
                ) from None

    X = parsed[:, : len(feat_idx)].copy()
    y = None
    meta = {
        "source": str(path),
        "column_roles": ["feature"] * len(feat_idx),
        "feature_names": [names[j] for j in feat_idx],
    }

    if label_col is not None:
        raw = parsed[:, -1]
        values = np.unique(raw)
        if values.size != 2:
            raise DataError(
                "label column %r has %d distinct values, need exactly 2"
                % (names[y_idx], values.size)
            )
        y = np.where(raw == values[0], -1.0, 1.0)
        meta["label_map"] = {str(float(values[0])): -1, str(float(values[1])): 1}
    elif response_col is not None:
        y = parsed[:, -1].copy()

    if standardize:
        mean = X.mean(axis=0)
        sd = X.std(axis=0)
        dead = np.flatnonzero(sd == 0.0)
        if dead.size:
            raise DataError(
                "cannot standardize constant column(s): %s"
                % [meta["feature_names"][j] for j in dead]
            )
        X = (X - mean) / sd
        meta["standardization"] = {"mean": mean.tolist(), "sd": sd.tolist()}

    if add_intercept:
        X = np.hstack([X, np.ones((n, 1))])
        meta["column_roles"] = meta["column_roles"] + ["intercept"]
        meta["feature_names"] = meta["feature_names"] + ["_intercept"]

    return Dataset(X=X, y=y, meta=meta)


# ---------------------------------------------------------------------------
# on-disk store
# ---------------------------------------------------------------------------

def save_dataset(dataset: Dataset, dir_path) -> None:
    """Write a dataset directory: X.bin, optional y.bin, meta.json."""
    dir_path = Path(dir_path)
    dir_path.mkdir(parents=True, exist_ok=True)
    (dir_path / "X.bin").write_bytes(dataset.X.tobytes())
    info = {
        "format_version": FORMAT_VERSION,
        "n": dataset.n,
        "d": dataset.d,
        "dtype": "float64",
        "has_y": dataset.y is not None,
        "meta": dataset.meta,
    }
    if dataset.y is not None:
        (dir_path / "y.bin").write_bytes(dataset.y.tobytes())
    with open(dir_path / "meta.json", "w") as fh:
        json.dump(info, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_dataset(dir_path) -> Dataset:
    dir_path = Path(dir_path)
    meta_path = dir_path / "meta.json"
    if not meta_path.exists():
        raise DataError("%s: not a dataset directory (missing meta.json)" % dir_path)
    with open(meta_path) as fh:
        info = json.load(fh)
    if info.get("format_version") != FORMAT_VERSION:
        raise DataError(
            "%s: unsupported dataset format version %r"
            % (dir_path, info.get("format_version"))
        )
    n, d = int(info["n"]), int(info["d"])
    raw = (dir_path / "X.bin").read_bytes()
    if len(raw) != n * d * 8:
        raise DataError(
            "%s: X.bin holds %d bytes, expected %d" % (dir_path, len(raw), n * d * 8)
        )
    X = np.frombuffer(raw, dtype=np.float64).reshape(n, d).copy()
    y = None
    if info.get("has_y"):
        raw = (dir_path / "y.bin").read_bytes()
        if len(raw) != n * 8:
            raise DataError(
                "%s: y.bin holds %d bytes, expected %d" % (dir_path, len(raw), n * 8)
            )
        y = np.frombuffer(raw, dtype=np.float64).copy()
    return Dataset(X=X, y=y, meta=info.get("meta", {}))
